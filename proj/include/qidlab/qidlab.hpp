#pragma once

// Umbrella header: quasi-infinite divisibility analysis for mixed
// discrete + absolutely continuous distributions.

#include "qidlab/base.hpp"
#include "qidlab/quad.hpp"
#include "qidlab/model.hpp"
#include "qidlab/charfn.hpp"
#include "qidlab/distlog.hpp"
#include "qidlab/triplet.hpp"
#include "qidlab/moments.hpp"
#include "qidlab/oracle.hpp"
#include "qidlab/io.hpp"
