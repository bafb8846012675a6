#pragma once

#include "eaqec/correction.hpp"
#include "eaqec/dephasing_channel.hpp"
#include "eaqec/errors.hpp"
#include "eaqec/mixed_env.hpp"
#include "eaqec/numerics.hpp"
#include "eaqec/quantum_state.hpp"
