#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "deim/pair.hpp"
#include "deim/rng.hpp"
#include "deim/vocab.hpp"

namespace deim {

/// One validated TSV record: `label \t sentence_a \t sentence_b [\t group_id]`.
struct RawPair {
  int label = 0;
  std::string sentence_a;
  std::string sentence_b;
  std::string group_id;
  std::size_t line = 0;
};

struct Dataset {
  Task task = Task::Snli;
  std::vector<RawPair> records;
  std::size_t dropped_unlabeled = 0;  // SNLI "-" gold labels
};

/// Parses the normalized TSV format. Blank lines are ignored. Throws
/// DataError naming the line on an unknown label, a wrong field count, or a
/// ranking record without a group id.
Dataset read_dataset(std::istream& in, Task task, const std::string& source = "<stream>");
Dataset read_dataset(const std::string& path, Task task);

/// Vocabulary over both sentences of every record, ordered by descending
/// frequency then token text.
Vocab build_vocab(const Dataset& train, std::size_t min_count = 1);

struct PairSet {
  std::vector<TokenizedPair> pairs;  // unpadded, truncated to the cap
  std::size_t skipped_empty = 0;
};

/// Tokenizes, truncates each sentence to `max_len` tokens and assigns ids.
/// Records with an empty sentence after tokenization are skipped and counted.
PairSet tokenize_dataset(const Dataset& data, const Vocab& vocab, std::size_t max_len);

struct Batch {
  std::vector<TokenizedPair> pairs;  // padded to len_a x len_b
  std::size_t len_a = 0;
  std::size_t len_b = 0;

  std::size_t size() const { return pairs.size(); }
  std::vector<int> labels() const;
  /// size() x len_a (resp. len_b) row-major id matrices.
  std::vector<TokenId> ids_a() const;
  std::vector<TokenId> ids_b() const;
};

/// Pads the selected pairs to the longest sentence in the batch.
Batch make_batch(const std::vector<TokenizedPair>& pairs, const std::vector<std::size_t>& indices);

/// Index lists of consecutive batches over [0, count); shuffled with `rng`
/// when given, otherwise in input order.
std::vector<std::vector<std::size_t>> batch_indices(std::size_t count, std::size_t batch_size, Rng* rng);

std::vector<Batch> build_batches(const std::vector<TokenizedPair>& pairs, std::size_t batch_size, Rng* rng);

struct Group {
  std::string id;
  std::vector<std::size_t> members;  // indices into the pair list, input order
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

/// Groups pairs by group_id in order of first appearance.
std::vector<Group> group_pairs(const std::vector<TokenizedPair>& pairs);

struct Triple {
  std::size_t positive;
  std::size_t negative;
};

/// One triple per positive of every group that has both a positive and a
/// negative candidate; the negative is drawn uniformly from the group.
std::vector<Triple> make_ranking_triples(const std::vector<TokenizedPair>& pairs, const std::vector<Group>& groups,
                                         Rng& rng);

}  // namespace deim
