#pragma once

#include <cstdint>

#include "mwlab/data.hpp"

namespace mwlab {

/// Topic-structured retrieval benchmark with planted per-query offsets.
///
/// Document d belongs to topic d % n_topics and draws doc_topic_words words
/// from that topic's vocabulary plus doc_filler_words from a small filler
/// vocabulary shared by every document. A query copies query_words of its
/// positive document's topic words and adds a query-specific number of
/// filler words, uniform in [0, max_query_filler]. Because every document
/// carries filler, the filler count shifts a query's similarity to the whole
/// corpus by roughly the same amount: a per-query offset that a
/// shift-invariant objective has no reason to remove.
struct SyntheticSpec {
  std::size_t n_queries = 2000;
  std::size_t n_docs = 5000;
  std::size_t n_topics = 250;
  std::size_t topic_vocab = 24;
  std::size_t doc_topic_words = 8;
  std::size_t query_words = 3;
  std::size_t filler_vocab = 4;
  std::size_t doc_filler_words = 8;
  std::size_t max_query_filler = 12;
  std::uint64_t seed = 7;

  void validate() const;
};

struct SyntheticData {
  Corpus corpus;
  QuerySet queries;  // hard_negative_ids left empty
};

SyntheticData make_synthetic(const SyntheticSpec& spec);

}  // namespace mwlab
