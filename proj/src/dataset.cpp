#include "gazezsl/dataset.hpp"

#include <algorithm>
#include <filesystem>

#include "gazezsl/common.hpp"

namespace gazezsl {

namespace fs = std::filesystem;

Dataset load_dataset(const std::string& dir, unsigned threads) {
    const fs::path root(dir);
    if (!fs::is_directory(root)) throw Error("dataset directory not found: " + dir);
    Dataset d;
    d.dir = dir;
    d.manifest = load_manifest((root / "manifest.txt").string());
    d.features = load_feature_matrix((root / "features.txt").string(), d.manifest);
    if (fs::is_directory(root / "gaze")) d.streams = load_gaze_streams(dir, d.manifest, threads);

    const auto attributes = root / "attributes.txt";
    if (fs::exists(attributes)) {
        d.attributes = parse_attributes(read_file(attributes.string()), d.manifest.classes, attributes.string());
    }
    const auto bubbles = root / "bubbles.csv";
    if (fs::exists(bubbles)) d.bubbles = parse_bubble_tracks(read_file(bubbles.string()), bubbles.string());

    // Documents follow class order; classes without a file get none.
    for (const auto& label : d.manifest.classes) {
        const auto doc = root / "corpus" / (label + ".txt");
        if (fs::exists(doc)) d.documents.push_back({label, read_file(doc.string())});
    }
    for (const auto& img : d.manifest.images) {
        const auto map = root / "saliency" / (img.image_id + ".txt");
        if (fs::exists(map)) d.saliency[img.image_id] = parse_numeric_grid(read_file(map.string()), map.string());
    }
    return d;
}

std::vector<std::pair<std::string, std::string>> digest_tree(const std::string& dir) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const auto rel = fs::relative(entry.path(), dir).generic_string();
        out.emplace_back(rel, hex_digest(fnv1a(read_file(entry.path().string()))));
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace gazezsl
