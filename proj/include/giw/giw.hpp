#pragma once

#include "covers.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "group_ring.hpp"
#include "int_matrix.hpp"
#include "jacobian.hpp"
#include "json_io.hpp"
#include "smith.hpp"
#include "tower.hpp"
