#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "unresolved/dump.hpp"

namespace unresolved {

// Parse/link diagnostics carried alongside the dataset.
struct IngestSummary {
  std::size_t post_rows = 0;
  std::size_t post_row_errors = 0;
  std::size_t other_post_types = 0;
  std::size_t user_rows = 0;
  std::size_t user_row_errors = 0;
  std::size_t dangling_answers = 0;
  std::size_t broken_accepted_refs = 0;
  std::size_t owners_without_profile = 0;
};

// Dataset file, one JSON object per line:
//
//   {"record":"header","format":"unresolved-dataset/1","criteria":{...},
//    "counts":{...},"ingest":{...}}
//   {"record":"thread","question":{...},"label":"Resolved",
//    "best_answer_id":12,"topic_answer":{...},"answers":[...],"owner":{...}}
//
// Only the question and the topic answer keep their bodies; the other
// answers are stored as (id, score, creation_date). Owner profiles are
// repeated per thread so every line is self-contained.
void write_dataset(std::ostream& out, const Dataset& dataset, const IngestSummary& summary);

struct LoadedDataset {
  Dataset dataset;
  IngestSummary summary;
};

// Throws DataError with the offending line number.
LoadedDataset read_dataset(std::istream& in);

}  // namespace unresolved
