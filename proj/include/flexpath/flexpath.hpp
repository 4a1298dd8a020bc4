#pragma once

#include "flexpath/beam.hpp"
#include "flexpath/beam_dynamics.hpp"
#include "flexpath/beam_modal.hpp"
#include "flexpath/error.hpp"
#include "flexpath/kinematics.hpp"
#include "flexpath/plate.hpp"
#include "flexpath/safety.hpp"
#include "flexpath/trajectory.hpp"
