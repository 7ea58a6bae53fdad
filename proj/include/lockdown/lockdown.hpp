#pragma once

#include "lockdown/errors.hpp"
#include "lockdown/final_size.hpp"
#include "lockdown/optimizer.hpp"
#include "lockdown/sir_core.hpp"
#include "lockdown/sweep.hpp"
