#pragma once

#include "hb/error.hpp"
#include "hb/poly.hpp"
#include "hb/quadrature.hpp"
#include "hb/fnexpr.hpp"
#include "hb/hardy.hpp"
#include "hb/rational.hpp"
#include "hb/clark.hpp"
#include "hb/cyclicity.hpp"
#include "hb/json_io.hpp"
#include "hb/cli.hpp"
