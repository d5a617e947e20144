#pragma once

#include "ntfdm/array.hpp"
#include "ntfdm/dependence.hpp"
#include "ntfdm/diagnosis.hpp"
#include "ntfdm/errors.hpp"
#include "ntfdm/fft.hpp"
#include "ntfdm/io.hpp"
#include "ntfdm/mcculloch.hpp"
#include "ntfdm/ntf.hpp"
#include "ntfdm/pipeline.hpp"
#include "ntfdm/selectors.hpp"
#include "ntfdm/signal.hpp"
#include "ntfdm/simulate.hpp"
#include "ntfdm/spectral.hpp"
#include "ntfdm/stats.hpp"
