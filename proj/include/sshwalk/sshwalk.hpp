#pragma once

#include "sshwalk/bloch.hpp"
#include "sshwalk/eigen.hpp"
#include "sshwalk/errors.hpp"
#include "sshwalk/experiments.hpp"
#include "sshwalk/io.hpp"
#include "sshwalk/lattice_state.hpp"
#include "sshwalk/linalg.hpp"
#include "sshwalk/oracle.hpp"
#include "sshwalk/scattering.hpp"
#include "sshwalk/version.hpp"
