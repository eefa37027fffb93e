#pragma once

#include "qspec/copula.hpp"
#include "qspec/csv.hpp"
#include "qspec/estimate.hpp"
#include "qspec/models.hpp"
#include "qspec/normal.hpp"
#include "qspec/parallel.hpp"
#include "qspec/spectra.hpp"
#include "qspec/verify.hpp"
