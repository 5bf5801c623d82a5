#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "deim/vocab.hpp"

namespace deim {

enum class Task { Snli, SciTail, Quora, WikiQa };

enum class TaskKind { Classify, Rank };

struct TaskInfo {
  Task task;
  std::string_view name;
  TaskKind kind;
  std::size_t num_classes;  // 1 for ranking (scalar score)
  std::size_t max_len;      // per-sentence token cap
  std::vector<std::string_view> labels;  // label text -> class id by position
};

const TaskInfo& task_info(Task task);
Task parse_task(std::string_view name);

/// Two token-id sequences padded to a common batch length, with masks.
struct TokenizedPair {
  std::vector<TokenId> ids_a;
  std::vector<TokenId> ids_b;
  std::size_t len_a = 0;
  std::size_t len_b = 0;
  std::vector<std::uint8_t> mask_a;  // len_a ones, then zeros
  std::vector<std::uint8_t> mask_b;
  int label = 0;  // class id, or relevance (0/1) for ranking
  std::string pair_id;
  std::string group_id;  // question id for ranking tasks
  // Contextual-cache keys: the sentence's (truncated) tokens joined by spaces.
  std::string sentence_id_a;
  std::string sentence_id_b;
};

/// Builds an unpadded pair (masks all ones) from token lists.
TokenizedPair make_pair(const Vocab& vocab, const std::vector<std::string>& tokens_a,
                        const std::vector<std::string>& tokens_b, int label, std::string pair_id = {},
                        std::string group_id = {});

/// Pads both sentences of `pair` with PAD up to the given lengths.
void pad_pair(TokenizedPair& pair, std::size_t len_a, std::size_t len_b);

std::string join_tokens(const std::vector<std::string>& tokens);

}  // namespace deim
