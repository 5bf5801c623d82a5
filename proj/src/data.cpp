#include "deim/data.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <unordered_map>

#include "deim/errors.hpp"

namespace deim {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

std::string where(const std::string& source, std::size_t line) { return source + ":" + std::to_string(line); }

}  // namespace

Dataset read_dataset(std::istream& in, Task task, const std::string& source) {
  const TaskInfo& info = task_info(task);
  Dataset data;
  data.task = task;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto fields = split_tabs(line);
    const bool ranking = info.kind == TaskKind::Rank;
    if (fields.size() < 3 || fields.size() > 4) {
      throw DataError(where(source, line_no) + ": expected 3 or 4 tab-separated fields, found " +
                      std::to_string(fields.size()));
    }
    if (task == Task::Snli && fields[0] == "-") {
      ++data.dropped_unlabeled;
      continue;
    }
    const auto it = std::find(info.labels.begin(), info.labels.end(), fields[0]);
    if (it == info.labels.end()) {
      throw DataError(where(source, line_no) + ": unknown " + std::string(info.name) + " label '" + fields[0] + "'");
    }
    RawPair r;
    r.label = static_cast<int>(it - info.labels.begin());
    r.sentence_a = fields[1];
    r.sentence_b = fields[2];
    if (fields.size() == 4) r.group_id = fields[3];
    if (ranking && r.group_id.empty()) {
      throw DataError(where(source, line_no) + ": ranking record has no group id");
    }
    r.line = line_no;
    data.records.push_back(std::move(r));
  }
  return data;
}

Dataset read_dataset(const std::string& path, Task task) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset " + path);
  return read_dataset(in, task, path);
}

Vocab build_vocab(const Dataset& train, std::size_t min_count) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& r : train.records) {
    for (const auto* s : {&r.sentence_a, &r.sentence_b})
      for (auto& tok : tokenize(*s)) ++counts[tok];
  }
  std::vector<std::pair<std::string, std::size_t>> sorted(counts.begin(), counts.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  Vocab vocab;
  for (const auto& [tok, n] : sorted) {
    if (n < min_count) break;
    if (tok == Vocab::kPadToken || tok == Vocab::kUnkToken) continue;
    vocab.add(tok);
  }
  return vocab;
}

PairSet tokenize_dataset(const Dataset& data, const Vocab& vocab, std::size_t max_len) {
  if (max_len == 0) throw ConfigError("max_len must be positive");
  PairSet out;
  for (const auto& r : data.records) {
    auto a = tokenize(r.sentence_a);
    auto b = tokenize(r.sentence_b);
    if (a.empty() || b.empty()) {
      ++out.skipped_empty;
      continue;
    }
    if (a.size() > max_len) a.resize(max_len);
    if (b.size() > max_len) b.resize(max_len);
    out.pairs.push_back(make_pair(vocab, a, b, r.label, std::to_string(r.line), r.group_id));
  }
  return out;
}

std::vector<int> Batch::labels() const {
  std::vector<int> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(p.label);
  return out;
}

std::vector<TokenId> Batch::ids_a() const {
  std::vector<TokenId> out;
  for (const auto& p : pairs) out.insert(out.end(), p.ids_a.begin(), p.ids_a.end());
  return out;
}

std::vector<TokenId> Batch::ids_b() const {
  std::vector<TokenId> out;
  for (const auto& p : pairs) out.insert(out.end(), p.ids_b.begin(), p.ids_b.end());
  return out;
}

Batch make_batch(const std::vector<TokenizedPair>& pairs, const std::vector<std::size_t>& indices) {
  Batch b;
  for (std::size_t i : indices) {
    b.len_a = std::max(b.len_a, pairs.at(i).len_a);
    b.len_b = std::max(b.len_b, pairs.at(i).len_b);
  }
  b.pairs.reserve(indices.size());
  for (std::size_t i : indices) {
    TokenizedPair p = pairs[i];
    pad_pair(p, b.len_a, b.len_b);
    b.pairs.push_back(std::move(p));
  }
  return b;
}

std::vector<std::vector<std::size_t>> batch_indices(std::size_t count, std::size_t batch_size, Rng* rng) {
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  if (rng) shuffle(order, *rng);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < count; start += batch_size) {
    const std::size_t end = std::min(count, start + batch_size);
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

std::vector<Batch> build_batches(const std::vector<TokenizedPair>& pairs, std::size_t batch_size, Rng* rng) {
  std::vector<Batch> out;
  for (const auto& idx : batch_indices(pairs.size(), batch_size, rng)) out.push_back(make_batch(pairs, idx));
  return out;
}

std::vector<Group> group_pairs(const std::vector<TokenizedPair>& pairs) {
  std::vector<Group> groups;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    auto [it, fresh] = index.emplace(pairs[i].group_id, groups.size());
    if (fresh) groups.push_back(Group{pairs[i].group_id, {}, 0, 0});
    Group& g = groups[it->second];
    g.members.push_back(i);
    (pairs[i].label > 0 ? g.positives : g.negatives) += 1;
  }
  return groups;
}

std::vector<Triple> make_ranking_triples(const std::vector<TokenizedPair>& pairs, const std::vector<Group>& groups,
                                         Rng& rng) {
  std::vector<Triple> out;
  std::vector<std::size_t> negatives;
  for (const auto& g : groups) {
    if (g.positives == 0 || g.negatives == 0) continue;
    negatives.clear();
    for (std::size_t i : g.members)
      if (pairs[i].label == 0) negatives.push_back(i);
    for (std::size_t i : g.members)
      if (pairs[i].label > 0) out.push_back({i, negatives[rng.below(negatives.size())]});
  }
  return out;
}

}  // namespace deim
