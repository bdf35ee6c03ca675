#pragma once

#include "privreg/bounds.hpp"
#include "privreg/dataset.hpp"
#include "privreg/errors.hpp"
#include "privreg/experiments.hpp"
#include "privreg/io.hpp"
#include "privreg/mechanisms.hpp"
#include "privreg/solvers.hpp"
