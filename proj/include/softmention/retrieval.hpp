#pragma once

// Few-shot example selection: random coverage, sentence-embedding similarity,
// entity-embedding similarity, and relation-signature matching. Pools are
// small enough that every search is an exact scan.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "softmention/corpus.hpp"

namespace softmention::retrieval {

using Vector = std::vector<double>;

// Throws Config errors on dimension mismatch or zero-norm input.
double cosine(const Vector& a, const Vector& b);

// Sidecar embedding store: line-delimited {key, dims, values[]} records.
// Sentence vectors are keyed by sentence id, entity vectors by
// "<sentence_id>#<software_mention_idx>".
class EmbeddingStore {
 public:
  static EmbeddingStore load(const std::filesystem::path& path);
  static std::string entity_key(const std::string& sentence_id, size_t idx);

  void put(const std::string& key, Vector v);
  const Vector& get(const std::string& key) const;  // throws when missing
  const Vector* find(const std::string& key) const;
  size_t size() const { return vectors_.size(); }

 private:
  std::map<std::string, Vector> vectors_;
};

struct Scored {
  const AnnotatedSentence* sentence = nullptr;
  double similarity = 0.0;
};

struct SentenceIndex {
  struct Entry {
    std::string id;
    Vector vec;
    const AnnotatedSentence* sentence;
  };
  std::vector<Entry> entries;
  size_t dims = 0;
};

SentenceIndex build_sentence_index(const Corpus& pool,
                                   const EmbeddingStore& store);

// The k highest-cosine entries, descending; ties broken by sentence id
// ascending. Returns fewer than k only when the index is smaller than k.
std::vector<Scored> top_k_sentences(const SentenceIndex& index,
                                    const Vector& query, size_t k);

struct EntityKey {
  std::string surface;
  Label label;
  std::string sentence_id;
  Vector vec;
  const AnnotatedSentence* sentence = nullptr;
};

std::vector<EntityKey> build_entity_index(const Corpus& pool,
                                          const EmbeddingStore& store);

// Per candidate, the k most similar training entities; owning sentences are
// unioned, deduplicated keeping the best similarity, and ordered by
// descending best similarity (ties by sentence id).
std::vector<Scored> top_k_per_entity(const std::vector<EntityKey>& index,
                                     const std::vector<EntityKey>& candidates,
                                     size_t k_per_entity);

enum class RandomMode { FixedK, CoverAllLabels };

// FixedK: k uniform draws without replacement. CoverAllLabels: shuffle with
// the seed, then keep a sentence iff it adds an entity label not yet covered,
// stopping once all five labels are seen. Throws a Data error naming the
// uncovered labels when the pool cannot cover them.
std::vector<const AnnotatedSentence*> random_coverage_examples(
    const Corpus& pool, RandomMode mode, size_t k, uint64_t rng_seed);

// Among train sentences containing a gold relation with exactly this
// signature, the one most similar to the query vector.
std::optional<Scored> retrieve_relation_example(const Signature& signature,
                                                const Corpus& train,
                                                const EmbeddingStore& store,
                                                const Vector& query);

}  // namespace softmention::retrieval
