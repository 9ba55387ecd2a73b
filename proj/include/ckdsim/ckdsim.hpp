#pragma once

#include "ckdsim/classical.hpp"
#include "ckdsim/config.hpp"
#include "ckdsim/duffing.hpp"
#include "ckdsim/fft.hpp"
#include "ckdsim/grid.hpp"
#include "ckdsim/husimi.hpp"
#include "ckdsim/image.hpp"
#include "ckdsim/io.hpp"
#include "ckdsim/otoc.hpp"
#include "ckdsim/parallel.hpp"
#include "ckdsim/propagator.hpp"
#include "ckdsim/runner.hpp"
#include "ckdsim/wavefunction.hpp"
