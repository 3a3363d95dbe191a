#pragma once

#include "splatreg/alphanorm.hpp"
#include "splatreg/fit.hpp"
#include "splatreg/geometry.hpp"
#include "splatreg/io.hpp"
#include "splatreg/loss.hpp"
#include "splatreg/parallel.hpp"
#include "splatreg/projection.hpp"
#include "splatreg/rasterizer.hpp"
#include "splatreg/reg3d.hpp"
#include "splatreg/scenegen.hpp"
#include "splatreg/types.hpp"
