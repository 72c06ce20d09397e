#pragma once

#include "quiltframe/constructions.hpp"
#include "quiltframe/errors.hpp"
#include "quiltframe/gabor.hpp"
#include "quiltframe/quilt.hpp"
#include "quiltframe/reconstruct.hpp"
#include "quiltframe/signal.hpp"
