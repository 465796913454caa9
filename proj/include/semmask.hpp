#pragma once

#include "semmask/checkpoint.hpp"
#include "semmask/codec.hpp"
#include "semmask/config.hpp"
#include "semmask/data/corpus.hpp"
#include "semmask/data/oracles.hpp"
#include "semmask/data/palette.hpp"
#include "semmask/data/png_io.hpp"
#include "semmask/data/scene.hpp"
#include "semmask/downstream.hpp"
#include "semmask/experiment.hpp"
#include "semmask/link.hpp"
#include "semmask/masking.hpp"
#include "semmask/metrics.hpp"
#include "semmask/plot.hpp"
#include "semmask/segmentation.hpp"
#include "semmask/training.hpp"
