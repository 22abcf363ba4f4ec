#include "mwlab/synthetic.hpp"

#include <cstdio>
#include <string>
#include <vector>

#include "mwlab/error.hpp"
#include "mwlab/rng.hpp"

namespace mwlab {

void SyntheticSpec::validate() const {
  if (n_docs == 0 || n_queries == 0 || n_topics == 0 || topic_vocab == 0 || filler_vocab == 0) {
    throw ValidationError("synthetic spec sizes must be >= 1");
  }
  if (n_queries > n_docs) throw ValidationError("synthetic spec needs n_queries <= n_docs");
  if (doc_topic_words == 0 || query_words == 0) {
    throw ValidationError("synthetic documents and queries need topic words");
  }
}

namespace {

std::string padded(char prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%06zu", prefix, i);
  return buf;
}

std::string topic_word(std::size_t topic, std::size_t w) {
  return "t" + std::to_string(topic) + "w" + std::to_string(w);
}

std::string filler_word(std::size_t w) { return "filler" + std::to_string(w); }

}  // namespace

SyntheticData make_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  SyntheticData data;

  std::vector<std::vector<std::string>> doc_topic_terms(spec.n_docs);
  for (std::size_t d = 0; d < spec.n_docs; ++d) {
    const std::size_t topic = d % spec.n_topics;
    std::string text;
    for (std::size_t k = 0; k < spec.doc_topic_words; ++k) {
      doc_topic_terms[d].push_back(topic_word(topic, rng.below(spec.topic_vocab)));
      text += doc_topic_terms[d].back() + " ";
    }
    for (std::size_t k = 0; k < spec.doc_filler_words; ++k) {
      text += filler_word(rng.below(spec.filler_vocab)) + " ";
    }
    text.pop_back();
    data.corpus.add({padded('d', d), std::move(text)});
  }

  std::vector<std::size_t> docs(spec.n_docs);
  for (std::size_t d = 0; d < spec.n_docs; ++d) docs[d] = d;
  for (std::size_t i = 0; i < spec.n_queries; ++i) {
    std::swap(docs[i], docs[i + rng.below(spec.n_docs - i)]);
    const std::size_t pos = docs[i];
    const auto& terms = doc_topic_terms[pos];
    std::string text;
    for (std::size_t k = 0; k < spec.query_words; ++k) text += terms[rng.below(terms.size())] + " ";
    const std::size_t filler = rng.below(spec.max_query_filler + 1);
    for (std::size_t k = 0; k < filler; ++k) text += filler_word(rng.below(spec.filler_vocab)) + " ";
    text.pop_back();
    data.queries.push_back({padded('q', i), std::move(text), {padded('d', pos)}, {}});
  }
  return data;
}

}  // namespace mwlab
