#pragma once

#include "wcoj/core.hpp"
#include "wcoj/index.hpp"
#include "wcoj/agm.hpp"
#include "wcoj/generic_join.hpp"
#include "wcoj/triangle.hpp"
#include "wcoj/baseline.hpp"
#include "wcoj/rewrite.hpp"
#include "wcoj/gen.hpp"
#include "wcoj/io.hpp"
#include "wcoj/bench.hpp"
