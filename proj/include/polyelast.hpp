// Umbrella header.
#pragma once

#include "polyelast/analysis.hpp"
#include "polyelast/assembly.hpp"
#include "polyelast/checks.hpp"
#include "polyelast/integration.hpp"
#include "polyelast/manufactured.hpp"
#include "polyelast/mesh.hpp"
#include "polyelast/mesh_generator.hpp"
#include "polyelast/mesh_io.hpp"
#include "polyelast/quadrature.hpp"
#include "polyelast/solver.hpp"
#include "polyelast/space.hpp"
#include "polyelast/vtk.hpp"
