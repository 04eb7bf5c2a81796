#include "sgst/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace sgst {

namespace {

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<uint8_t>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

SplitSpec make_split(const std::vector<ClipRecord>& clips, double fraction, uint64_t seed) {
    if (fraction <= 0.0 || fraction >= 1.0) throw DataError("split fraction must lie in (0, 1)");
    std::map<std::string, int64_t> signer_counts;
    for (const ClipRecord& c : clips) ++signer_counts[c.signer_id];
    if (signer_counts.size() < 2) throw DataError("signer-disjoint split needs at least two signers");

    std::vector<std::pair<std::string, int64_t>> signers(signer_counts.begin(), signer_counts.end());
    // seeded shuffle breaks ties between equal-sized signers
    Rng rng(seed);
    Rng order_rng = rng.fork("split-order");
    for (size_t i = signers.size(); i > 1; --i)
        std::swap(signers[i - 1], signers[order_rng.next_uint(static_cast<uint32_t>(i))]);
    std::stable_sort(signers.begin(), signers.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });

    const double total = static_cast<double>(clips.size());
    const double train_target = fraction * total;
    const double test_target = total - train_target;
    double train_assigned = 0, test_assigned = 0;
    SplitSpec split;
    for (const auto& [signer, count] : signers) {
        const double train_deficit = train_target - train_assigned;
        const double test_deficit = test_target - test_assigned;
        const bool to_test = test_deficit > train_deficit;
        split.signer_in_test[signer] = to_test;
        (to_test ? test_assigned : train_assigned) += static_cast<double>(count);
    }
    // both sides must be populated
    auto count_side = [&](bool test) {
        int64_t n = 0;
        for (const auto& [signer, in_test] : split.signer_in_test)
            if (in_test == test) ++n;
        return n;
    };
    if (count_side(true) == 0) split.signer_in_test[signers.back().first] = true;
    if (count_side(false) == 0) split.signer_in_test[signers.front().first] = false;

    for (const ClipRecord& c : clips)
        (split.signer_in_test.at(c.signer_id) ? split.test_ids : split.train_ids).push_back(c.clip_id);
    if (split.train_ids.empty() || split.test_ids.empty())
        throw DataError("split produced an empty side");
    return split;
}

double lr_at(int epoch, const TrainConfig& cfg) {
    if (epoch < 0 || epoch >= cfg.epochs)
        throw NumericError("epoch " + std::to_string(epoch) + " outside [0, " + std::to_string(cfg.epochs) + ")");
    const int steps = epoch / cfg.decay_period;
    double lr = cfg.lr0;
    for (int i = 0; i < steps; ++i) lr *= cfg.decay_factor;
    // The schedule is decimal by intent (3e-3, 3e-4, ...). Re-rounding through
    // 12 significant digits lands each decade step on the double of its
    // decimal value instead of one ulp off.
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", lr);
    return std::strtod(buf, nullptr);
}

const ClipRecord& clip_by_id(const std::vector<ClipRecord>& clips, const std::string& id) {
    for (const ClipRecord& c : clips)
        if (c.clip_id == id) return c;
    throw DataError("unknown clip id: " + id);
}

namespace {

Tensor<float> assemble_batch(const std::vector<Tensor<float>>& samples) {
    const Shape& s = samples[0].shape;  // 3 x T x P x P
    Tensor<float> batch({static_cast<int64_t>(samples.size()), s[0], s[1], s[2], s[3]});
    const int64_t stride = samples[0].numel();
    for (size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].shape != s) throw NumericError("stream samples disagree in shape within a batch");
        std::copy(samples[i].data.begin(), samples[i].data.end(),
                  batch.data.begin() + static_cast<int64_t>(i) * stride);
    }
    return batch;
}

const PrecomputedFlow* lookup_flow(const FlowLookup& flow, const std::string& clip_id) {
    return flow ? flow(clip_id) : nullptr;
}

}  // namespace

ScoreMatrix evaluate_stream(Resnet3d& model, const std::vector<ClipRecord>& clips,
                            const std::vector<std::string>& ids, StreamKind stream, const StreamParams& sparams,
                            int batch_size, const FlowLookup& flow) {
    if (ids.empty()) throw DataError("no clips to evaluate");
    ScoreMatrix m;
    m.num_classes = model.config().num_classes;
    m.stream = to_string(stream);
    m.scores = Tensor<float>::zeros({static_cast<int64_t>(ids.size()), m.num_classes});

    std::vector<Tensor<float>> samples;
    std::vector<int64_t> rows;
    auto flush = [&]() {
        if (samples.empty()) return;
        Tensor<float> logits = model.forward_eval(assemble_batch(samples));
        const int64_t k = m.num_classes;
        for (size_t i = 0; i < rows.size(); ++i) {
            // stabilized softmax row
            const float* lrow = logits.ptr() + static_cast<int64_t>(i) * k;
            float mx = lrow[0];
            for (int64_t c = 1; c < k; ++c) mx = std::max(mx, lrow[c]);
            double denom = 0.0;
            for (int64_t c = 0; c < k; ++c) denom += std::exp(static_cast<double>(lrow[c] - mx));
            for (int64_t c = 0; c < k; ++c)
                m.scores[rows[i] * k + c] =
                    static_cast<float>(std::exp(static_cast<double>(lrow[c] - mx)) / denom);
        }
        samples.clear();
        rows.clear();
    };

    for (size_t i = 0; i < ids.size(); ++i) {
        const ClipRecord& clip = clip_by_id(clips, ids[i]);
        m.clip_ids.push_back(clip.clip_id);
        m.labels.push_back(clip.label);
        ProxyIndexPlan plan = center_proxy_indices(clip.length(), sparams.temporal_len);
        samples.push_back(make_stream_sample(clip, stream, sparams, plan, nullptr,
                                             lookup_flow(flow, clip.clip_id)));
        rows.push_back(static_cast<int64_t>(i));
        if (static_cast<int>(samples.size()) == batch_size) flush();
    }
    flush();
    validate_scores(m);
    return m;
}

TrainResult train_stream(Resnet3d& model, const std::vector<ClipRecord>& clips, const SplitSpec& split,
                         StreamKind stream, const TrainConfig& tcfg, const StreamParams& sparams,
                         const FlowLookup& flow, const std::function<void(const EpochLog&)>& on_epoch) {
    if (split.train_ids.empty()) throw DataError("empty training split");
    const int64_t K = model.config().num_classes;
    for (const std::string& id : split.train_ids) {
        const ClipRecord& c = clip_by_id(clips, id);
        if (c.label < 0 || c.label >= K)
            throw DataError("clip " + id + " has label " + std::to_string(c.label) + ", model classifies " +
                            std::to_string(K));
    }

    Rng root(tcfg.seed);
    TrainResult result;
    for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
        const double lr = lr_at(epoch, tcfg);

        std::vector<std::string> order = split.train_ids;
        Rng shuffle_rng = root.fork("shuffle", static_cast<uint64_t>(epoch));
        for (size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.next_uint(static_cast<uint32_t>(i))]);

        // batch boundaries; a lone trailing sample joins the previous batch
        // so train-mode batchnorm never sees a single-element channel
        std::vector<size_t> bounds;
        for (size_t start = 0; start < order.size(); start += static_cast<size_t>(tcfg.batch_size))
            bounds.push_back(start);
        bounds.push_back(order.size());
        if (bounds.size() > 2 && bounds[bounds.size() - 1] - bounds[bounds.size() - 2] == 1)
            bounds.erase(bounds.end() - 2);

        double loss_sum = 0.0;
        int64_t seen = 0, correct = 0;
        for (size_t bi = 0; bi + 1 < bounds.size(); ++bi) {
            const size_t start = bounds[bi];
            const size_t end = bounds[bi + 1];
            std::vector<Tensor<float>> samples;
            std::vector<int> labels;
            for (size_t i = start; i < end; ++i) {
                const ClipRecord& clip = clip_by_id(clips, order[i]);
                const uint64_t cid = fnv1a(clip.clip_id);
                Rng proxy_rng = root.fork("proxy", static_cast<uint64_t>(epoch), cid);
                ProxyIndexPlan plan = sample_proxy_indices(clip.length(), sparams.temporal_len, proxy_rng);
                Rng aug_rng = root.fork("aug", static_cast<uint64_t>(epoch), cid);
                const auto [aug_h, aug_w] = pre_crop_dims(clip, stream, sparams);
                AugmentSpec aug = draw_augment(aug_h, aug_w, sparams.patch, sparams.rotate_max_deg, aug_rng);
                samples.push_back(make_stream_sample(clip, stream, sparams, plan, &aug,
                                                     lookup_flow(flow, clip.clip_id)));
                labels.push_back(clip.label);
            }

            auto logits = model.forward(make_leaf(assemble_batch(samples)), BnMode::Train);
            auto ce = softmax_crossentropy(logits, labels);
            const double batch_loss = ce.loss->value[0];
            if (!std::isfinite(batch_loss)) {
                std::string ids;
                for (size_t i = start; i < end; ++i) ids += (i == start ? "" : ", ") + order[i];
                throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch of clips [" +
                                   ids + "]");
            }
            backward(ce.loss);
            sgd_update(model.params(), lr, tcfg.momentum, tcfg.weight_decay);
            model.params().zero_grads();

            const int64_t bsz = static_cast<int64_t>(end - start);
            loss_sum += batch_loss * static_cast<double>(bsz);
            for (int64_t i = 0; i < bsz; ++i)
                if (argmax_row(ce.probs, i) == labels[static_cast<size_t>(i)]) ++correct;
            seen += bsz;
        }

        EpochLog log;
        log.epoch = epoch;
        log.lr = lr;
        log.loss = loss_sum / static_cast<double>(seen);
        log.train_acc = static_cast<double>(correct) / static_cast<double>(seen);
        if (!split.test_ids.empty()) {
            ScoreMatrix test_scores =
                evaluate_stream(model, clips, split.test_ids, stream, sparams, tcfg.batch_size, flow);
            log.test_acc = accuracy(test_scores);
        }
        result.logs.push_back(log);
        result.epochs_run = epoch + 1;
        if (on_epoch) on_epoch(log);

        if (epoch + 1 == 20 && log.train_acc < 2.0 / static_cast<double>(K)) result.not_converging = true;
        if (tcfg.stop_at_train_acc > 0.0 && log.train_acc >= tcfg.stop_at_train_acc) break;
    }
    return result;
}

}  // namespace sgst
