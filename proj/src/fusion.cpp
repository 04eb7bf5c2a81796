#include "sgst/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace sgst {

void validate_scores(const ScoreMatrix& m) {
    if (m.rows() == 0) throw DataError("score matrix is empty");
    if (m.num_classes < 1) throw DataError("score matrix needs at least one class");
    if (m.scores.shape != Shape{m.rows(), m.num_classes})
        throw DataError("score matrix shape " + shape_str(m.scores.shape) + " does not match " +
                        std::to_string(m.rows()) + " clips x " + std::to_string(m.num_classes) + " classes");
    if (static_cast<int64_t>(m.labels.size()) != m.rows())
        throw DataError("score matrix labels out of step with clip ids");
    for (int64_t r = 0; r < m.rows(); ++r) {
        double sum = 0.0;
        for (int64_t k = 0; k < m.num_classes; ++k) sum += m.scores[r * m.num_classes + k];
        if (std::abs(sum - 1.0) > 1e-5)
            throw DataError("score row " + std::to_string(r) + " sums to " + std::to_string(sum) +
                            ", expected 1 within 1e-5");
    }
}

ScoreMatrix fuse(const std::vector<ScoreMatrix>& mats, const FusionSpec& spec) {
    if (mats.empty()) throw DataError("nothing to fuse");
    if (spec.entries.size() != mats.size())
        throw DataError("fusion spec names " + std::to_string(spec.entries.size()) + " streams for " +
                        std::to_string(mats.size()) + " matrices");
    for (const ScoreMatrix& m : mats) validate_scores(m);

    const ScoreMatrix& first = mats[0];
    std::vector<double> weights(mats.size(), 0.0);
    double total_weight = 0.0;
    for (size_t i = 0; i < mats.size(); ++i) {
        const ScoreMatrix& m = mats[i];
        if (m.clip_ids != first.clip_ids)
            throw DataError("stream '" + m.stream + "' has a different clip ordering than '" + first.stream + "'");
        if (m.num_classes != first.num_classes)
            throw DataError("stream '" + m.stream + "' has K=" + std::to_string(m.num_classes) + ", expected " +
                            std::to_string(first.num_classes));
        bool found = false;
        for (const auto& [name, w] : spec.entries) {
            if (name != m.stream) continue;
            if (found) throw DataError("fusion spec repeats stream '" + name + "'");
            if (w < 0 || !std::isfinite(w)) throw DataError("fusion weight for '" + name + "' must be finite and >= 0");
            weights[i] = w;
            found = true;
        }
        if (!found) throw DataError("fusion spec is missing stream '" + m.stream + "'");
        total_weight += weights[i];
    }
    if (total_weight <= 0.0) throw DataError("all fusion weights are zero");

    ScoreMatrix out;
    out.clip_ids = first.clip_ids;
    out.labels = first.labels;
    out.num_classes = first.num_classes;
    out.stream = "fused";
    out.scores = Tensor<float>::zeros(first.scores.shape);
    for (size_t i = 0; i < mats.size(); ++i) {
        const double w = weights[i] / total_weight;
        for (int64_t j = 0; j < out.scores.numel(); ++j)
            out.scores[j] += static_cast<float>(w * static_cast<double>(mats[i].scores[j]));
    }
    return out;
}

int argmax_row(const Tensor<float>& scores, int64_t row) {
    const int64_t k = scores.shape[1];
    int best = 0;
    for (int64_t c = 1; c < k; ++c)
        if (scores[row * k + c] > scores[row * k + best]) best = static_cast<int>(c);
    return best;
}

double accuracy(const ScoreMatrix& scores, const std::vector<int>& labels) {
    validate_scores(scores);
    if (static_cast<int64_t>(labels.size()) != scores.rows())
        throw DataError("accuracy: " + std::to_string(labels.size()) + " labels for " +
                        std::to_string(scores.rows()) + " rows");
    int64_t correct = 0;
    for (int64_t r = 0; r < scores.rows(); ++r)
        if (argmax_row(scores.scores, r) == labels[static_cast<size_t>(r)]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(scores.rows());
}

double accuracy(const ScoreMatrix& scores) { return accuracy(scores, scores.labels); }

std::map<SignCategory, double> per_category_accuracy(const ScoreMatrix& scores, const std::vector<int>& labels,
                                                     const std::vector<SignCategory>& categories) {
    validate_scores(scores);
    if (labels.size() != categories.size() || static_cast<int64_t>(labels.size()) != scores.rows())
        throw DataError("per-category accuracy needs one label and one category per row");
    std::map<SignCategory, std::pair<int64_t, int64_t>> counts;  // category -> (correct, total)
    for (int64_t r = 0; r < scores.rows(); ++r) {
        auto& [correct, total] = counts[categories[static_cast<size_t>(r)]];
        ++total;
        if (argmax_row(scores.scores, r) == labels[static_cast<size_t>(r)]) ++correct;
    }
    std::map<SignCategory, double> out;
    for (const auto& [cat, ct] : counts)
        out[cat] = static_cast<double>(ct.first) / static_cast<double>(ct.second);
    return out;
}

std::vector<AblationRow> ablation_report(const std::vector<ScoreMatrix>& mats,
                                         const std::vector<FusionSpec>& specs) {
    std::vector<AblationRow> rows;
    rows.reserve(specs.size());
    for (const FusionSpec& spec : specs) {
        std::vector<ScoreMatrix> selected;
        for (const auto& [name, w] : spec.entries) {
            bool found = false;
            for (const ScoreMatrix& m : mats)
                if (m.stream == name) {
                    selected.push_back(m);
                    found = true;
                    break;
                }
            if (!found) throw DataError("ablation spec references unknown stream '" + name + "'");
        }
        ScoreMatrix fused = selected.size() == 1 ? selected[0] : fuse(selected, spec);
        AblationRow row;
        row.spec = spec;
        row.accuracy = accuracy(fused, fused.labels);
        rows.push_back(std::move(row));
    }
    return rows;
}

FusionSpec grid_search_weights(const std::vector<ScoreMatrix>& mats, int steps) {
    if (mats.empty()) throw DataError("nothing to search over");
    if (steps < 1) throw DataError("grid search needs at least one step");
    for (const ScoreMatrix& m : mats) validate_scores(m);

    const size_t n = mats.size();
    FusionSpec best;
    double best_acc = -1.0;

    // enumerate levels in {0..steps}^n, skipping the all-zero corner
    std::vector<int> idx(n, 0);
    while (true) {
        bool any = false;
        for (int v : idx) any = any || v > 0;
        if (any) {
            FusionSpec spec;
            for (size_t i = 0; i < n; ++i)
                spec.entries.emplace_back(mats[i].stream, static_cast<double>(idx[i]) / steps);
            const double acc = accuracy(fuse(mats, spec), mats[0].labels);
            if (acc > best_acc) {
                best_acc = acc;
                best = spec;
            }
        }
        size_t pos = 0;
        while (pos < n && ++idx[pos] > steps) idx[pos++] = 0;
        if (pos == n) break;
    }
    return best;
}

namespace {

bool spec_has_stream(const FusionSpec& spec, const std::string& name) {
    for (const auto& [n, w] : spec.entries)
        if (n == name && w > 0) return true;
    return false;
}

}  // namespace

std::string ablation_csv(const std::vector<AblationRow>& rows, const std::vector<std::string>& stream_order) {
    std::ostringstream os;
    for (const std::string& s : stream_order) os << s << ",";
    os << "accuracy\n";
    os << std::fixed << std::setprecision(4);
    for (const AblationRow& row : rows) {
        for (const std::string& s : stream_order) os << (spec_has_stream(row.spec, s) ? 1 : 0) << ",";
        os << row.accuracy << "\n";
    }
    return os.str();
}

std::string ablation_text(const std::vector<AblationRow>& rows, const std::vector<std::string>& stream_order) {
    size_t width = 8;
    for (const std::string& s : stream_order) width = std::max(width, s.size() + 2);
    std::ostringstream os;
    for (const std::string& s : stream_order) os << std::setw(static_cast<int>(width)) << s;
    os << std::setw(12) << "accuracy" << "\n";
    os << std::fixed << std::setprecision(4);
    for (const AblationRow& row : rows) {
        for (const std::string& s : stream_order)
            os << std::setw(static_cast<int>(width)) << (spec_has_stream(row.spec, s) ? "x" : "-");
        os << std::setw(12) << row.accuracy << "\n";
    }
    return os.str();
}

void save_scores_csv(const std::string& path, const ScoreMatrix& m, const std::string& provenance_header) {
    validate_scores(m);
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw DataError("cannot open for write: " + path);
    if (!provenance_header.empty()) f << "# " << provenance_header << "\n";
    f << "clip_id,label";
    for (int64_t k = 0; k < m.num_classes; ++k) f << ",c" << k;
    f << "\n";
    f << std::setprecision(9);
    for (int64_t r = 0; r < m.rows(); ++r) {
        f << m.clip_ids[static_cast<size_t>(r)] << "," << m.labels[static_cast<size_t>(r)];
        for (int64_t k = 0; k < m.num_classes; ++k) f << "," << m.scores[r * m.num_classes + k];
        f << "\n";
    }
    if (!f) throw DataError("write failed: " + path);
}

ScoreMatrix load_scores_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open scores: " + path);
    ScoreMatrix m;
    m.stream = path;
    std::string line;
    bool have_header = false;
    std::vector<float> values;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') {
            // pick the stream tag out of the provenance comment
            const size_t pos = line.find("stream=");
            if (pos != std::string::npos) {
                size_t end = line.find(' ', pos);
                if (end == std::string::npos) end = line.size();
                m.stream = line.substr(pos + 7, end - pos - 7);
            }
            continue;
        }
        std::vector<std::string> fields;
        std::istringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (!have_header) {
            if (fields.size() < 3 || fields[0] != "clip_id" || fields[1] != "label")
                throw DataError(path + ":" + std::to_string(lineno) + ": expected header clip_id,label,c0..");
            m.num_classes = static_cast<int64_t>(fields.size()) - 2;
            have_header = true;
            continue;
        }
        if (static_cast<int64_t>(fields.size()) != m.num_classes + 2)
            throw DataError(path + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(m.num_classes + 2) + " columns, got " + std::to_string(fields.size()));
        m.clip_ids.push_back(fields[0]);
        try {
            m.labels.push_back(std::stoi(fields[1]));
            for (int64_t k = 0; k < m.num_classes; ++k) values.push_back(std::stof(fields[static_cast<size_t>(k + 2)]));
        } catch (const std::exception&) {
            throw DataError(path + ":" + std::to_string(lineno) + ": malformed number");
        }
    }
    if (!have_header || m.clip_ids.empty()) throw DataError(path + ": no score rows");
    m.scores = Tensor<float>({m.rows(), m.num_classes}, std::move(values));
    validate_scores(m);
    return m;
}

}  // namespace sgst
