#pragma once

#include "prsparse/arg_extreme_tree.hpp"
#include "prsparse/dsm_io.hpp"
#include "prsparse/frank_wolfe.hpp"
#include "prsparse/gk.hpp"
#include "prsparse/nl1.hpp"
#include "prsparse/problems.hpp"
#include "prsparse/report.hpp"
#include "prsparse/sparse.hpp"
#include "prsparse/weight_tree.hpp"
