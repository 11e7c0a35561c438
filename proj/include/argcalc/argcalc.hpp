#ifndef ARGCALC_ARGCALC_HPP
#define ARGCALC_ARGCALC_HPP

#include "argcalc/apps.hpp"
#include "argcalc/argdb.hpp"
#include "argcalc/errors.hpp"
#include "argcalc/formula.hpp"
#include "argcalc/network.hpp"
#include "argcalc/parser.hpp"
#include "argcalc/primes.hpp"
#include "argcalc/propagation.hpp"
#include "argcalc/sat.hpp"

#endif
