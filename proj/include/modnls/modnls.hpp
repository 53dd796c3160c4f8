#pragma once

#include "modnls/config.hpp"
#include "modnls/dispersion.hpp"
#include "modnls/error.hpp"
#include "modnls/fft.hpp"
#include "modnls/harness.hpp"
#include "modnls/io.hpp"
#include "modnls/modspace.hpp"
#include "modnls/nonlinear.hpp"
#include "modnls/parallel.hpp"
#include "modnls/rational.hpp"
#include "modnls/solver.hpp"
#include "modnls/spectral.hpp"
#include "modnls/verify.hpp"

namespace modnls {
inline constexpr const char* kVersion = "1.0.0";
}
