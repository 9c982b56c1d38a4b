#pragma once

// Umbrella header for the whole library.

#include "nlos/camera.hpp"
#include "nlos/config.hpp"
#include "nlos/dbscan.hpp"
#include "nlos/evaluation.hpp"
#include "nlos/io.hpp"
#include "nlos/localization.hpp"
#include "nlos/pipeline.hpp"
#include "nlos/plot.hpp"
#include "nlos/reflection.hpp"
#include "nlos/scenario.hpp"
#include "nlos/simulator.hpp"
#include "nlos/spatial.hpp"
#include "nlos/types.hpp"
