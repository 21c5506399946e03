#pragma once

#include "wavecompact/errors.hpp"
#include "wavecompact/mesh.hpp"
#include "wavecompact/operators.hpp"
#include "wavecompact/norms.hpp"
#include "wavecompact/quadrature.hpp"
#include "wavecompact/data.hpp"
#include "wavecompact/spectral.hpp"
#include "wavecompact/scheme.hpp"
#include "wavecompact/reference.hpp"
#include "wavecompact/presets.hpp"
#include "wavecompact/experiments.hpp"
