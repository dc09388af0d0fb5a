#pragma once

#include "fresco/ab_algebra.hpp"
#include "fresco/document.hpp"
#include "fresco/errors.hpp"
#include "fresco/fresco_core.hpp"
#include "fresco/invariants.hpp"
#include "fresco/rational.hpp"
#include "fresco/series.hpp"
#include "fresco/transforms.hpp"
