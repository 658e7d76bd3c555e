#pragma once

#include "spectral/baselines.hpp"
#include "spectral/bounds.hpp"
#include "spectral/decoder.hpp"
#include "spectral/errors.hpp"
#include "spectral/fourier_fit.hpp"
#include "spectral/io.hpp"
#include "spectral/koopman_fit.hpp"
#include "spectral/oscillator.hpp"
#include "spectral/parallel.hpp"
#include "spectral/phase_correction.hpp"
#include "spectral/random.hpp"
#include "spectral/spectral_core.hpp"
#include "spectral/synth.hpp"
