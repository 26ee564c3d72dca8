#pragma once

#include "qsm/basis.hpp"
#include "qsm/builtins.hpp"
#include "qsm/dense_oracle.hpp"
#include "qsm/error.hpp"
#include "qsm/evolution.hpp"
#include "qsm/language.hpp"
#include "qsm/paths.hpp"
#include "qsm/rule_table.hpp"
#include "qsm/semantics.hpp"
#include "qsm/symbol.hpp"
