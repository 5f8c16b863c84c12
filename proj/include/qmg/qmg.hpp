#pragma once

#include "qmg/auction.hpp"
#include "qmg/clearing.hpp"
#include "qmg/csv.hpp"
#include "qmg/errors.hpp"
#include "qmg/numerics.hpp"
#include "qmg/risk.hpp"
#include "qmg/strategy.hpp"
#include "qmg/wigner.hpp"
#include "qmg/literal.hpp"
#include "qmg/scenario.hpp"
#include "qmg/zeno.hpp"
