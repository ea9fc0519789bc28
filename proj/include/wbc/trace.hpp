#pragma once

#include <string>

#include "wbc/env.hpp"

namespace wbc {

// Episode traces are JSONL: a header record (world, reference path, goal,
// tolerance), one record per step, and a result record.
void write_trace_jsonl(const EpisodeTrace& trace, const std::string& path);

// Corrupt lines are skipped with a warning.
EpisodeTrace read_trace_jsonl(const std::string& path);

}  // namespace wbc
