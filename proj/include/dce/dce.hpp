// dce.hpp — Umbrella header

#pragma once

#include "dce/dynamics.hpp"
#include "dce/eigensystem.hpp"
#include "dce/entanglement.hpp"
#include "dce/errors.hpp"
#include "dce/hilbert.hpp"
#include "dce/models.hpp"
#include "dce/protocol.hpp"
#include "dce/spectral.hpp"
#include "dce/config.hpp"
#include "dce/io.hpp"
#include "dce/cli.hpp"
