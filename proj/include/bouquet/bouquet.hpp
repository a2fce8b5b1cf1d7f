#pragma once

// Umbrella header: equivariant super parallel transport, holonomy and
// Chern character bouquets over chart-modeled group actions.

#include "bouquet/chern.hpp"
#include "bouquet/complex_matrix.hpp"
#include "bouquet/errors.hpp"
#include "bouquet/exterior.hpp"
#include "bouquet/forms.hpp"
#include "bouquet/geometry.hpp"
#include "bouquet/grassmann.hpp"
#include "bouquet/registry.hpp"
#include "bouquet/scenario.hpp"
#include "bouquet/serialization.hpp"
#include "bouquet/super_connection.hpp"
#include "bouquet/transport.hpp"
