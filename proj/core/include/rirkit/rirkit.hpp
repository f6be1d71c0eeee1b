#pragma once

#include "rirkit/acoustics.hpp"
#include "rirkit/blob.hpp"
#include "rirkit/crip.hpp"
#include "rirkit/error.hpp"
#include "rirkit/geomat.hpp"
#include "rirkit/losses.hpp"
#include "rirkit/matrix.hpp"
#include "rirkit/rvq.hpp"
#include "rirkit/signal.hpp"
#include "rirkit/simulator.hpp"
#include "rirkit/wav.hpp"
