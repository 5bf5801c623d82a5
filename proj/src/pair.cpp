#include "deim/pair.hpp"

#include <array>

#include "deim/errors.hpp"

namespace deim {

const TaskInfo& task_info(Task task) {
  static const std::array<TaskInfo, 4> kTasks = {{
      {Task::Snli, "snli", TaskKind::Classify, 3, 64, {"entailment", "contradiction", "neutral"}},
      {Task::SciTail, "scitail", TaskKind::Classify, 2, 48, {"entails", "neutral"}},
      {Task::Quora, "quora", TaskKind::Classify, 2, 48, {"0", "1"}},
      {Task::WikiQa, "wikiqa", TaskKind::Rank, 1, 32, {"0", "1"}},
  }};
  return kTasks[static_cast<std::size_t>(task)];
}

Task parse_task(std::string_view name) {
  for (Task t : {Task::Snli, Task::SciTail, Task::Quora, Task::WikiQa}) {
    if (task_info(t).name == name) return t;
  }
  throw ConfigError("unknown task '" + std::string(name) + "' (expected snli, scitail, quora or wikiqa)");
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

TokenizedPair make_pair(const Vocab& vocab, const std::vector<std::string>& tokens_a,
                        const std::vector<std::string>& tokens_b, int label, std::string pair_id,
                        std::string group_id) {
  TokenizedPair p;
  p.ids_a = vocab.encode(tokens_a);
  p.ids_b = vocab.encode(tokens_b);
  p.len_a = p.ids_a.size();
  p.len_b = p.ids_b.size();
  p.mask_a.assign(p.len_a, 1);
  p.mask_b.assign(p.len_b, 1);
  p.label = label;
  p.pair_id = std::move(pair_id);
  p.group_id = std::move(group_id);
  p.sentence_id_a = join_tokens(tokens_a);
  p.sentence_id_b = join_tokens(tokens_b);
  return p;
}

void pad_pair(TokenizedPair& pair, std::size_t len_a, std::size_t len_b) {
  if (len_a < pair.len_a || len_b < pair.len_b) {
    throw DimensionError("pad_pair: cannot pad below the unpadded length");
  }
  pair.ids_a.resize(len_a, Vocab::kPad);
  pair.ids_b.resize(len_b, Vocab::kPad);
  pair.mask_a.resize(len_a, 0);
  pair.mask_b.resize(len_b, 0);
}

}  // namespace deim
