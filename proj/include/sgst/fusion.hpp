#pragma once

#include <map>
#include <string>
#include <vector>

#include "sgst/manifest.hpp"
#include "sgst/tensor.hpp"

namespace sgst {

// Per-stream softmax scores for a set of clips; the unit of fusion and
// evaluation. Rows sum to 1 within 1e-5.
struct ScoreMatrix {
    std::vector<std::string> clip_ids;
    std::vector<int> labels;
    int64_t num_classes = 0;
    Tensor<float> scores;  // M x K
    std::string stream;    // producing stream tag

    int64_t rows() const { return static_cast<int64_t>(clip_ids.size()); }
};

void validate_scores(const ScoreMatrix& m);

// Streams with non-negative weights, at least one positive.
struct FusionSpec {
    std::vector<std::pair<std::string, double>> entries;
};

// Weighted average of matching rows: row = sum(w_s * row_s) / sum(w_s).
// Requires identical clip ordering and class count, and the spec must cover
// exactly the given streams.
ScoreMatrix fuse(const std::vector<ScoreMatrix>& mats, const FusionSpec& spec);

// Fraction of rows whose argmax (ties to the lowest class id) matches the
// label.
double accuracy(const ScoreMatrix& scores, const std::vector<int>& labels);
double accuracy(const ScoreMatrix& scores);

int argmax_row(const Tensor<float>& scores, int64_t row);

// Accuracy restricted to each category's clips; empty categories are absent
// from the result rather than zero.
std::map<SignCategory, double> per_category_accuracy(const ScoreMatrix& scores, const std::vector<int>& labels,
                                                     const std::vector<SignCategory>& categories);

struct AblationRow {
    FusionSpec spec;
    double accuracy = 0.0;
};

// One row per spec over the named score matrices; duplicate specs produce
// duplicate rows.
std::vector<AblationRow> ablation_report(const std::vector<ScoreMatrix>& mats,
                                         const std::vector<FusionSpec>& specs);

// Coarse grid search over per-stream weights in {0, 1/steps, ..., 1}
// maximizing accuracy on the given matrices (a validation split, typically).
// Deterministic: ties keep the first candidate in enumeration order. Off by
// default everywhere; uniform weighting is the standard fusion.
FusionSpec grid_search_weights(const std::vector<ScoreMatrix>& mats, int steps = 4);

std::string ablation_csv(const std::vector<AblationRow>& rows, const std::vector<std::string>& stream_order);
std::string ablation_text(const std::vector<AblationRow>& rows, const std::vector<std::string>& stream_order);

// CSV persistence: optional "# key=value ..." provenance comment, then
// header "clip_id,label,c0..c{K-1}".
void save_scores_csv(const std::string& path, const ScoreMatrix& m, const std::string& provenance_header);
ScoreMatrix load_scores_csv(const std::string& path);

}  // namespace sgst
