#pragma once

#include "dedup/bits.hpp"
#include "dedup/bounds.hpp"
#include "dedup/chunking.hpp"
#include "dedup/codecs.hpp"
#include "dedup/harness.hpp"
#include "dedup/random.hpp"
#include "dedup/source_model.hpp"
