#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sgst/error.hpp"

namespace sgst {

// The six annotated semantic groups plus a catch-all.
enum class SignCategory { Conditional, Negative, Pointing, WH, YN, Time, Other };

std::string to_string(SignCategory c);
SignCategory parse_category(const std::string& s);

struct Annotation {
    std::string gloss;
    int class_id = -1;
    SignCategory category = SignCategory::Other;
    int64_t start_frame = 0;  // half-open [start, end)
    int64_t end_frame = 0;
    std::string signer_id;
};

// One recorded video: identity, geometry and its sign annotations.
//
// Text form, tab separated:
//   line 1:  video_id  signer_id  fps  rgbHxW  depthHxW  frame_count
//   then optional channel lines:  @channel  <name>  <path>
//   then one annotation per line: gloss  class_id  category  start  end
// '#' starts a comment. Channels not listed resolve to the conventional
// "<video_id>.<channel>.sgt" next to the manifest.
struct VideoManifest {
    std::string video_id;
    std::string signer_id;
    double fps = 30.0;
    int64_t rgb_h = 0, rgb_w = 0;
    int64_t depth_h = 0, depth_w = 0;
    int64_t frame_count = 0;
    std::vector<Annotation> annotations;  // sorted by start_frame, non-overlapping
    std::map<std::string, std::string> channel_paths;
};

// Parses and validates; errors carry line numbers. Annotations come out
// sorted; overlapping or empty intervals and out-of-range frames are
// rejected. Total: any byte input either parses or raises DataError.
VideoManifest parse_manifest(const std::string& text, const std::string& source_name = "manifest");

VideoManifest load_manifest(const std::string& path);

std::string format_manifest(const VideoManifest& m);

// Default gloss -> category table (data/gloss_categories.tsv format: tab
// separated, '#' comments). Lookups for unlisted glosses return Other.
std::map<std::string, SignCategory> load_gloss_category_map(const std::string& path);

}  // namespace sgst
