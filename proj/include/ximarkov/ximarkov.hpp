#pragma once

#include "ximarkov/copula.hpp"
#include "ximarkov/error.hpp"
#include "ximarkov/estimators.hpp"
#include "ximarkov/linalg.hpp"
#include "ximarkov/measures.hpp"
#include "ximarkov/models.hpp"
#include "ximarkov/range_profile.hpp"
#include "ximarkov/lab/config.hpp"
#include "ximarkov/lab/csv_input.hpp"
#include "ximarkov/lab/emit.hpp"
#include "ximarkov/lab/experiments.hpp"
#include "ximarkov/lab/result.hpp"
