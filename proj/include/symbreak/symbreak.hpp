#pragma once

#include "symbreak/gf2.hpp"
#include "symbreak/codes.hpp"
#include "symbreak/tanner.hpp"
#include "symbreak/bp.hpp"
#include "symbreak/osd.hpp"
#include "symbreak/symbreak_decoder.hpp"
#include "symbreak/noise.hpp"
#include "symbreak/registry.hpp"
#include "symbreak/harness.hpp"
