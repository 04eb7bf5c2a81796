#include "sgst/manifest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace sgst {

std::string to_string(SignCategory c) {
    switch (c) {
        case SignCategory::Conditional: return "Conditional";
        case SignCategory::Negative: return "Negative";
        case SignCategory::Pointing: return "Pointing";
        case SignCategory::WH: return "WH";
        case SignCategory::YN: return "Y/N";
        case SignCategory::Time: return "Time";
        case SignCategory::Other: return "Other";
    }
    return "Other";
}

SignCategory parse_category(const std::string& s) {
    if (s == "Conditional" || s == "Cond") return SignCategory::Conditional;
    if (s == "Negative" || s == "Neg") return SignCategory::Negative;
    if (s == "Pointing" || s == "Point") return SignCategory::Pointing;
    if (s == "WH") return SignCategory::WH;
    if (s == "Y/N" || s == "YN") return SignCategory::YN;
    if (s == "Time") return SignCategory::Time;
    if (s == "Other") return SignCategory::Other;
    throw DataError("unknown category '" + s + "'");
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t pos = line.find('\t', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

int64_t parse_int(const std::string& s, const std::string& where) {
    int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw DataError(where + ": expected an integer, got '" + s + "'");
    return v;
}

double parse_double(const std::string& s, const std::string& where) {
    try {
        size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DataError(where + ": expected a number, got '" + s + "'");
    }
}

std::pair<int64_t, int64_t> parse_dims(const std::string& s, const std::string& where) {
    size_t x = s.find('x');
    if (x == std::string::npos) throw DataError(where + ": expected HxW dims, got '" + s + "'");
    return {parse_int(s.substr(0, x), where), parse_int(s.substr(x + 1), where)};
}

std::string strip_comment(const std::string& line) {
    size_t pos = line.find('#');
    std::string s = pos == std::string::npos ? line : line.substr(0, pos);
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    return s;
}

}  // namespace

VideoManifest parse_manifest(const std::string& text, const std::string& source_name) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    VideoManifest m;
    bool have_header = false;

    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = source_name + ":" + std::to_string(lineno);
        std::string body = strip_comment(line);
        if (body.empty()) continue;
        std::vector<std::string> fields = split_tabs(body);

        if (!have_header) {
            if (fields.size() != 6)
                throw DataError(where + ": header needs 6 tab-separated fields "
                                        "(video_id signer_id fps rgbHxW depthHxW frame_count), got " +
                                std::to_string(fields.size()));
            m.video_id = fields[0];
            m.signer_id = fields[1];
            m.fps = parse_double(fields[2], where + " fps");
            std::tie(m.rgb_h, m.rgb_w) = parse_dims(fields[3], where + " rgb dims");
            std::tie(m.depth_h, m.depth_w) = parse_dims(fields[4], where + " depth dims");
            m.frame_count = parse_int(fields[5], where + " frame_count");
            if (m.video_id.empty()) throw DataError(where + ": empty video_id");
            if (m.fps <= 0) throw DataError(where + ": fps must be positive");
            if (m.rgb_h <= 0 || m.rgb_w <= 0 || m.depth_h <= 0 || m.depth_w <= 0)
                throw DataError(where + ": image dims must be positive");
            if (m.frame_count <= 0) throw DataError(where + ": frame_count must be positive");
            have_header = true;
            continue;
        }

        if (fields[0] == "@channel") {
            if (fields.size() != 3) throw DataError(where + ": @channel needs a name and a path");
            m.channel_paths[fields[1]] = fields[2];
            continue;
        }

        if (fields.size() != 5)
            throw DataError(where + ": annotation needs 5 tab-separated fields "
                                    "(gloss class_id category start end), got " +
                            std::to_string(fields.size()));
        Annotation a;
        a.gloss = fields[0];
        a.class_id = static_cast<int>(parse_int(fields[1], where + " class_id"));
        try {
            a.category = parse_category(fields[2]);
        } catch (const DataError& e) {
            throw DataError(where + ": " + e.what());
        }
        a.start_frame = parse_int(fields[3], where + " start");
        a.end_frame = parse_int(fields[4], where + " end");
        a.signer_id = m.signer_id;
        if (a.gloss.empty()) throw DataError(where + ": empty gloss");
        if (a.class_id < 0) throw DataError(where + ": class_id must be non-negative");
        if (a.start_frame < 0) throw DataError(where + ": start frame must be non-negative");
        if (a.start_frame >= a.end_frame)
            throw DataError(where + ": empty interval [" + std::to_string(a.start_frame) + ", " +
                            std::to_string(a.end_frame) + ")");
        if (a.end_frame > m.frame_count)
            throw DataError(where + ": end frame " + std::to_string(a.end_frame) + " exceeds frame_count " +
                            std::to_string(m.frame_count));
        m.annotations.push_back(std::move(a));
    }

    if (!have_header) throw DataError(source_name + ": no header line");

    std::stable_sort(m.annotations.begin(), m.annotations.end(),
                     [](const Annotation& a, const Annotation& b) { return a.start_frame < b.start_frame; });
    for (size_t i = 1; i < m.annotations.size(); ++i) {
        const Annotation& prev = m.annotations[i - 1];
        const Annotation& cur = m.annotations[i];
        if (cur.start_frame < prev.end_frame)
            throw DataError(source_name + ": annotations '" + prev.gloss + "' [" +
                            std::to_string(prev.start_frame) + ", " + std::to_string(prev.end_frame) + ") and '" +
                            cur.gloss + "' [" + std::to_string(cur.start_frame) + ", " +
                            std::to_string(cur.end_frame) + ") overlap");
    }
    return m;
}

VideoManifest load_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open manifest: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_manifest(buf.str(), path);
}

std::map<std::string, SignCategory> load_gloss_category_map(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open gloss category map: " + path);
    std::map<std::string, SignCategory> out;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        std::string body = strip_comment(line);
        if (body.empty()) continue;
        std::vector<std::string> fields = split_tabs(body);
        if (fields.size() != 2)
            throw DataError(path + ":" + std::to_string(lineno) + ": expected gloss<TAB>category");
        try {
            out[fields[0]] = parse_category(fields[1]);
        } catch (const DataError& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::string format_manifest(const VideoManifest& m) {
    std::ostringstream out;
    out << m.video_id << "\t" << m.signer_id << "\t" << m.fps << "\t" << m.rgb_h << "x" << m.rgb_w << "\t"
        << m.depth_h << "x" << m.depth_w << "\t" << m.frame_count << "\n";
    for (const auto& [name, path] : m.channel_paths) out << "@channel\t" << name << "\t" << path << "\n";
    for (const Annotation& a : m.annotations)
        out << a.gloss << "\t" << a.class_id << "\t" << to_string(a.category) << "\t" << a.start_frame << "\t"
            << a.end_frame << "\n";
    return out.str();
}

}  // namespace sgst
