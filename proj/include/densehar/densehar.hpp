#pragma once

#include "densehar/baselines.hpp"
#include "densehar/data.hpp"
#include "densehar/errors.hpp"
#include "densehar/eval.hpp"
#include "densehar/gradcheck.hpp"
#include "densehar/kernels.hpp"
#include "densehar/model_io.hpp"
#include "densehar/optim.hpp"
#include "densehar/parallel.hpp"
#include "densehar/rng.hpp"
#include "densehar/synth.hpp"
#include "densehar/tensor.hpp"
#include "densehar/train.hpp"
#include "densehar/unet.hpp"
