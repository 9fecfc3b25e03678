#pragma once

#include "adversary.hpp"
#include "channel.hpp"
#include "codec.hpp"
#include "csv.hpp"
#include "dsp.hpp"
#include "fft.hpp"
#include "pairing.hpp"
#include "receiver.hpp"
#include "rng.hpp"
#include "spectrogram.hpp"
#include "sweeps.hpp"
#include "types.hpp"
#include "wav.hpp"
