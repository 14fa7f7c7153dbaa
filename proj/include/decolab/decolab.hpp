// decolab.hpp -- umbrella header

#pragma once

#include "decolab/bath.hpp"
#include "decolab/config.hpp"
#include "decolab/csv.hpp"
#include "decolab/errors.hpp"
#include "decolab/gaussian.hpp"
#include "decolab/harmonic.hpp"
#include "decolab/model.hpp"
#include "decolab/quadrature.hpp"
#include "decolab/runner.hpp"
#include "decolab/saddle.hpp"
#include "decolab/version.hpp"
