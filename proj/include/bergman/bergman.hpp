#pragma once

#include "bergman/bounds.hpp"
#include "bergman/extremize.hpp"
#include "bergman/generators.hpp"
#include "bergman/geometry.hpp"
#include "bergman/parallel.hpp"
#include "bergman/quadrature.hpp"
#include "bergman/rearrange.hpp"
#include "bergman/rng.hpp"
#include "bergman/serialize.hpp"
#include "bergman/space.hpp"
#include "bergman/special.hpp"
