#pragma once

#include "hypscatter/eisenstein.hpp"
#include "hypscatter/errors.hpp"
#include "hypscatter/green.hpp"
#include "hypscatter/halfplane.hpp"
#include "hypscatter/perturbed_eisenstein.hpp"
#include "hypscatter/quadrature.hpp"
#include "hypscatter/relzeta.hpp"
#include "hypscatter/specfun.hpp"
#include "hypscatter/traceform.hpp"
#include "hypscatter/version.hpp"
