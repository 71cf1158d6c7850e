// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "aams/attention.hpp"
#include "aams/codec.hpp"
#include "aams/error.hpp"
#include "aams/fusion.hpp"
#include "aams/image_io.hpp"
#include "aams/kernels.hpp"
#include "aams/linalg.hpp"
#include "aams/metrics.hpp"
#include "aams/parallel.hpp"
#include "aams/pipeline.hpp"
#include "aams/style_swap.hpp"
#include "aams/tensor.hpp"
#include "aams/transforms.hpp"
#include "aams/weights.hpp"
