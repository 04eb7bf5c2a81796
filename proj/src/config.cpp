#include "sgst/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace sgst {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    size_t b = s.find_last_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

int64_t to_int(const std::string& v, const std::string& key) {
    try {
        size_t used;
        int64_t x = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw UsageError("config key '" + key + "' expects an integer, got '" + v + "'");
    }
}

double to_double(const std::string& v, const std::string& key) {
    try {
        size_t used;
        double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw UsageError("config key '" + key + "' expects a number, got '" + v + "'");
    }
}

std::vector<std::string> split_commas(const std::string& v) {
    std::vector<std::string> out;
    std::istringstream in(v);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

void set_config_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "data.root") cfg.data_root = value;
    else if (key == "out.dir") cfg.out_dir = value;
    else if (key == "seed") cfg.seed = static_cast<uint64_t>(to_int(value, key));
    else if (key == "threads") cfg.threads = static_cast<int>(to_int(value, key));
    else if (key == "split.fraction") cfg.split_fraction = to_double(value, key);
    else if (key == "sampler.temporal") cfg.stream.temporal_len = to_int(value, key);
    else if (key == "sampler.patch") cfg.stream.patch = to_int(value, key);
    else if (key == "sampler.resize_short") cfg.stream.resize_short = to_int(value, key);
    else if (key == "sampler.rotate_max_deg") cfg.stream.rotate_max_deg = to_double(value, key);
    else if (key == "flow.alpha") cfg.stream.flow.alpha = to_double(value, key);
    else if (key == "flow.iters") cfg.stream.flow.iters = static_cast<int>(to_int(value, key));
    else if (key == "flow.clamp") cfg.stream.flow_clamp = to_double(value, key);
    else if (key == "depth.min_mm") cfg.stream.depth_range.min_mm = static_cast<uint16_t>(to_int(value, key));
    else if (key == "depth.max_mm") cfg.stream.depth_range.max_mm = static_cast<uint16_t>(to_int(value, key));
    else if (key == "regions.hand_scale") cfg.stream.hand_scale = to_double(value, key);
    else if (key == "regions.face_scale") cfg.stream.face_scale = to_double(value, key);
    else if (key == "regions.smooth_window") cfg.stream.smooth_window = static_cast<int>(to_int(value, key));
    else if (key == "model.depth") cfg.model.depth = static_cast<int>(to_int(value, key));
    else if (key == "model.base_width") cfg.model.base_width = to_int(value, key);
    else if (key == "model.classes") cfg.model.num_classes = to_int(value, key);
    else if (key == "train.lr0") cfg.train.lr0 = to_double(value, key);
    else if (key == "train.decay_factor") cfg.train.decay_factor = to_double(value, key);
    else if (key == "train.decay_period") cfg.train.decay_period = static_cast<int>(to_int(value, key));
    else if (key == "train.epochs") cfg.train.epochs = static_cast<int>(to_int(value, key));
    else if (key == "train.batch") cfg.train.batch_size = static_cast<int>(to_int(value, key));
    else if (key == "train.momentum") cfg.train.momentum = to_double(value, key);
    else if (key == "train.weight_decay") cfg.train.weight_decay = to_double(value, key);
    else if (key == "train.stop_at_train_acc") cfg.train.stop_at_train_acc = to_double(value, key);
    else if (key == "train.pretrained") cfg.pretrained = value;
    else if (key == "train.reset_head") cfg.reset_head = to_int(value, key) != 0;
    else if (key == "fusion.streams") cfg.fusion_streams = split_commas(value);
    else if (key == "fusion.weights") {
        cfg.fusion_weights.clear();
        for (const std::string& w : split_commas(value)) cfg.fusion_weights.push_back(to_double(w, key));
    } else if (key == "synth.classes") cfg.synth.classes = static_cast<int>(to_int(value, key));
    else if (key == "synth.clips_per_class") cfg.synth.clips_per_class = static_cast<int>(to_int(value, key));
    else if (key == "synth.signers") cfg.synth.signers = static_cast<int>(to_int(value, key));
    else if (key == "synth.frame") cfg.synth.frame_h = cfg.synth.frame_w = to_int(value, key);
    else if (key == "synth.min_frames") cfg.synth.min_frames = to_int(value, key);
    else if (key == "synth.max_frames") cfg.synth.max_frames = to_int(value, key);
    else throw UsageError("unknown config key '" + key + "'");
}

RunConfig parse_run_config(const std::string& text, const std::string& source_name) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError(source_name + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            set_config_key(cfg, key, value);
        } catch (const UsageError& e) {
            throw UsageError(source_name + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw UsageError("cannot open config: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_run_config(buf.str(), path);
}

std::string serialize_run_config(const RunConfig& cfg) {
    std::ostringstream os;
    os << "data.root = " << cfg.data_root << "\n";
    os << "out.dir = " << cfg.out_dir << "\n";
    os << "seed = " << cfg.seed << "\n";
    os << "threads = " << cfg.threads << "\n";
    os << "split.fraction = " << cfg.split_fraction << "\n";
    os << "sampler.temporal = " << cfg.stream.temporal_len << "\n";
    os << "sampler.patch = " << cfg.stream.patch << "\n";
    os << "sampler.resize_short = " << cfg.stream.resize_short << "\n";
    os << "sampler.rotate_max_deg = " << cfg.stream.rotate_max_deg << "\n";
    os << "flow.alpha = " << cfg.stream.flow.alpha << "\n";
    os << "flow.iters = " << cfg.stream.flow.iters << "\n";
    os << "flow.clamp = " << cfg.stream.flow_clamp << "\n";
    os << "depth.min_mm = " << cfg.stream.depth_range.min_mm << "\n";
    os << "depth.max_mm = " << cfg.stream.depth_range.max_mm << "\n";
    os << "regions.hand_scale = " << cfg.stream.hand_scale << "\n";
    os << "regions.face_scale = " << cfg.stream.face_scale << "\n";
    os << "regions.smooth_window = " << cfg.stream.smooth_window << "\n";
    os << "model.depth = " << cfg.model.depth << "\n";
    os << "model.base_width = " << cfg.model.base_width << "\n";
    os << "model.classes = " << cfg.model.num_classes << "\n";
    os << "train.lr0 = " << cfg.train.lr0 << "\n";
    os << "train.decay_factor = " << cfg.train.decay_factor << "\n";
    os << "train.decay_period = " << cfg.train.decay_period << "\n";
    os << "train.epochs = " << cfg.train.epochs << "\n";
    os << "train.batch = " << cfg.train.batch_size << "\n";
    os << "train.momentum = " << cfg.train.momentum << "\n";
    os << "train.weight_decay = " << cfg.train.weight_decay << "\n";
    os << "train.stop_at_train_acc = " << cfg.train.stop_at_train_acc << "\n";
    os << "train.pretrained = " << cfg.pretrained << "\n";
    os << "train.reset_head = " << (cfg.reset_head ? 1 : 0) << "\n";
    os << "fusion.streams = ";
    for (size_t i = 0; i < cfg.fusion_streams.size(); ++i) os << (i ? "," : "") << cfg.fusion_streams[i];
    os << "\n";
    os << "fusion.weights = ";
    for (size_t i = 0; i < cfg.fusion_weights.size(); ++i) os << (i ? "," : "") << cfg.fusion_weights[i];
    os << "\n";
    os << "synth.classes = " << cfg.synth.classes << "\n";
    os << "synth.clips_per_class = " << cfg.synth.clips_per_class << "\n";
    os << "synth.signers = " << cfg.synth.signers << "\n";
    os << "synth.frame = " << cfg.synth.frame_h << "\n";
    os << "synth.min_frames = " << cfg.synth.min_frames << "\n";
    os << "synth.max_frames = " << cfg.synth.max_frames << "\n";
    return os.str();
}

std::string config_hash(const RunConfig& cfg) {
    const std::string text = serialize_run_config(cfg);
    uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : text) {
        h ^= static_cast<uint8_t>(c);
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

std::string provenance_line(const RunConfig& cfg, const std::string& extras) {
    std::string line = std::string("sgst ") + kToolVersion + " seed=" + std::to_string(cfg.seed) +
                       " config=" + config_hash(cfg);
    if (!extras.empty()) line += " " + extras;
    return line;
}

}  // namespace sgst
