#pragma once

// Dense numerical kernels used by the factorization modules.
#include "rolekit/numkit/lsq.hpp"
#include "rolekit/numkit/nnls.hpp"
#include "rolekit/numkit/projection.hpp"
#include "rolekit/numkit/spectral.hpp"
#include "rolekit/numkit/tensor.hpp"
