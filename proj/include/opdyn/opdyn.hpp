#pragma once

#include "opdyn/error.hpp"
#include "opdyn/core_space.hpp"
#include "opdyn/linalg.hpp"
#include "opdyn/operators.hpp"
#include "opdyn/sequences.hpp"
#include "opdyn/creg_group.hpp"
#include "opdyn/operator_sets.hpp"
#include "opdyn/feasibility.hpp"
#include "opdyn/parallel.hpp"
#include "opdyn/recurrence.hpp"
#include "opdyn/transforms.hpp"
#include "opdyn/reggroups.hpp"
#include "opdyn/config.hpp"
#include "opdyn/report.hpp"
#include "opdyn/examples.hpp"
