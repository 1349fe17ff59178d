#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cpc/pairgen.hpp"

namespace cpc {
class ChatEndpoint;
}

namespace cpc::ftgen {

inline constexpr std::string_view kLinkOpen = "<CPLINK>";
inline constexpr std::string_view kLinkClose = "</CPLINK>";
inline constexpr std::string_view kLinkInstruction =
    "<CPLINK>XXX</CPLINK> indicates the OCR-derived answer.";

// "<CPLINK>" + answer + "</CPLINK>", payload untouched. Throws EmptyAnswer.
std::string wrap_link_tokens(std::string_view answer);

struct LinkSpan {
  std::string text;
  std::size_t start = 0;  // byte offset of the first payload byte
  std::size_t end = 0;    // one past the last payload byte

  bool operator==(const LinkSpan&) const = default;
};

// Spans in order. Throws MalformedLinks on nesting, a stray close or an
// unclosed open.
std::vector<LinkSpan> parse_link_spans(std::string_view response);

struct AugmentResult {
  std::string query;
  bool warned_empty = false;
};

// x'_C: the question, a newline, then the link-token instruction. An empty
// question yields the instruction alone. Throws AlreadyAugmented.
AugmentResult augment_cognitive_query(std::string_view question);

// Connector templates. Placeholders: {Q}, {y} in the query; {y_P}, {y_C},
// {y_neg} in the responses. Link tokens appear literally in the responses.
struct ConnectorTemplates {
  std::string query =
      "Question: {Q}\nProposed answer: {y}. Verify the proposed answer using the text in the red box.";
  std::string positive =
      "The text in the red box is <CPLINK>{y_P}</CPLINK>. The proposed answer is consistent with it. "
      "Answer: <CPLINK>{y_C}</CPLINK>.";
  std::string negative =
      "The text in the red box is <CPLINK>{y_P}</CPLINK>. The proposed answer {y_neg} is incorrect. "
      "Answer: <CPLINK>{y_C}</CPLINK>.";
};

struct Sample {
  std::string query;
  std::string response;

  bool operator==(const Sample&) const = default;
};

// Throws EmptyAnswer when any input is empty.
Sample make_connector_positive(std::string_view question, std::string_view cognitive,
                               std::string_view perceptual, const ConnectorTemplates& t = {});

// Throws NegEqualsPositive when negative == cognitive, EmptyAnswer on empty inputs.
Sample make_connector_negative(std::string_view question, std::string_view cognitive,
                               std::string_view perceptual, std::string_view negative,
                               const ConnectorTemplates& t = {});

std::string perturbation_prompt(std::string_view question, std::string_view answer);

struct Perturbation {
  std::array<std::string, 3> variants;
  std::size_t fallback_used = 0;  // variants supplied by the local generator
  std::vector<std::string> warnings;
};

// Three OCR-style corruptions, pairwise distinct and different from `answer`.
// With an endpoint the perturbation prompt is asked and invalid suggestions
// are replaced locally; without one a seeded confusion table is used.
// Throws EmptyAnswer; EndpointFailure propagates.
Perturbation perturb_answer(std::string_view answer, std::uint64_t seed,
                            ChatEndpoint* endpoint = nullptr, std::string_view question = {});

// Local generator only; throws PerturbationImpossible if fewer than three
// variants exist (not reachable for non-empty answers).
std::array<std::string, 3> local_perturbations(std::string_view answer, std::uint64_t seed);

enum class RecordKind { cognitive, perceptual, connector_pos, connector_neg };
std::string_view to_string(RecordKind k);
std::optional<RecordKind> record_kind_from_string(std::string_view s);

struct FtRecord {
  RecordKind record_kind = RecordKind::cognitive;
  std::string query;
  std::string response;
  std::string image;  // relative to the training-set file's directory
  std::string pair_id;
  std::vector<std::string> alternate_negatives;  // connector_neg only

  bool operator==(const FtRecord&) const = default;
};

struct PairFailure {
  std::string pair_id;
  std::string reason;
};

struct TrainingSet {
  std::vector<FtRecord> records;
  std::vector<PairFailure> failures;
};

struct TrainingOptions {
  ConnectorTemplates templates;
  std::filesystem::path manifest_dir;  // resolves the pairs' image paths
  bool allow_test_split = false;
};

// Four records per pair: (x'_C, y'_C), (x_P, y'_P), connector+, connector-.
// y'_C wraps GT, y'_P wraps the box text. Writes `out` as JSON lines.
TrainingSet emit_training_set(const std::vector<pairgen::EvalPair>& pairs, std::uint64_t seed,
                              ChatEndpoint* endpoint, const std::filesystem::path& out,
                              const TrainingOptions& options = {});

std::string to_training_line(const FtRecord& r);
FtRecord parse_training_line(std::string_view line);

}  // namespace cpc::ftgen
