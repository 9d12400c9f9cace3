#pragma once

// Umbrella header.

#include "sdquant/bench.hpp"
#include "sdquant/decode.hpp"
#include "sdquant/frames.hpp"
#include "sdquant/numkit.hpp"
#include "sdquant/quant.hpp"
#include "sdquant/rng.hpp"
#include "sdquant/spectral.hpp"
#include "sdquant/types.hpp"
