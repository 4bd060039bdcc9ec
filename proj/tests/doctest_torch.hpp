#pragma once

#include <torch/torch.h>

// c10's logging shims define glog-style CHECK* macros which shadow doctest's
// assertion macros; drop them before doctest is included.
#undef CHECK
#undef CHECK_EQ
#undef CHECK_NE
#undef CHECK_LE
#undef CHECK_LT
#undef CHECK_GE
#undef CHECK_GT
#undef CHECK_NOTNULL

#include <doctest.h>
