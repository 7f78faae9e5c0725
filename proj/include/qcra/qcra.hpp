#pragma once

#include "qcra/arithmetic.hpp"
#include "qcra/circuit.hpp"
#include "qcra/errors.hpp"
#include "qcra/estimation.hpp"
#include "qcra/gaussian.hpp"
#include "qcra/objective.hpp"
#include "qcra/resources.hpp"
#include "qcra/risk.hpp"
#include "qcra/uncertainty.hpp"
