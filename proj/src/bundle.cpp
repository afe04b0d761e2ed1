#include "seamcam/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "seamcam/error.hpp"

namespace seamcam {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const std::string &where, const std::string &what) {
    throw Error(ErrorCode::ParseError, fmt::format("{}: {}", where, what));
}

const json &field(const json &node, const char *name, const std::string &where) {
    if (!node.is_object()) {
        parse_fail(where, "expected an object");
    }
    const auto it = node.find(name);
    if (it == node.end()) {
        parse_fail(where, fmt::format("missing field '{}'", name));
    }
    return *it;
}

std::string get_string(const json &node, const char *name, const std::string &where) {
    const auto &v = field(node, name, where);
    if (!v.is_string()) {
        parse_fail(where + "." + name, "expected a string");
    }
    return v.get<std::string>();
}

std::int64_t get_int(const json &node, const char *name, const std::string &where) {
    const auto &v = field(node, name, where);
    if (!v.is_number_integer()) {
        parse_fail(where + "." + name, "expected an integer");
    }
    return v.get<std::int64_t>();
}

double get_number(const json &node, const char *name, const std::string &where) {
    const auto &v = field(node, name, where);
    if (!v.is_number()) {
        parse_fail(where + "." + name, "expected a number");
    }
    return v.get<double>();
}

const json &get_array(const json &node, const char *name, const std::string &where) {
    const auto &v = field(node, name, where);
    if (!v.is_array()) {
        parse_fail(where + "." + name, "expected an array");
    }
    return v;
}

int get_dimension(const json &node, const char *name, const std::string &where) {
    const auto value = get_int(node, name, where);
    if (value <= 0 || value > kMaxMaskSide) {
        parse_fail(where + "." + name, fmt::format("must lie in [1, {}], got {}", kMaxMaskSide, value));
    }
    return static_cast<int>(value);
}

std::string read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, fmt::format("cannot open '{}'", path.string()));
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::filesystem::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, fmt::format("cannot write '{}'", path.string()));
    }
    out << text;
    if (!out) {
        throw Error(ErrorCode::IoError, fmt::format("write to '{}' failed", path.string()));
    }
}

json parse_json(std::string_view text, std::string_view source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error &e) {
        parse_fail(std::string(source), e.what());
    }
}

}  // namespace

json mask_to_json(const BinaryMask &mask) {
    return json{{"height", mask.height}, {"width", mask.width}, {"counts", mask.counts}};
}

BinaryMask mask_from_json(const json &node, const std::string &where) {
    BinaryMask mask;
    mask.height = get_dimension(node, "height", where);
    mask.width = get_dimension(node, "width", where);
    const auto &counts = get_array(node, "counts", where);
    mask.counts.reserve(counts.size());
    std::int64_t total = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (!counts[i].is_number_integer()) {
            parse_fail(fmt::format("{}.counts[{}]", where, i), "expected an integer");
        }
        const auto run = counts[i].get<std::int64_t>();
        if (run < 0) {
            parse_fail(fmt::format("{}.counts[{}]", where, i), "negative run length");
        }
        total += run;
        mask.counts.push_back(run);
    }
    const auto pixels = static_cast<std::int64_t>(mask.height) * mask.width;
    if (total != pixels) {
        parse_fail(where + ".counts", fmt::format("runs sum to {}, expected {}", total, pixels));
    }
    return mask;
}

json bundle_to_json(const ProposalBundle &bundle) {
    json proposals = json::array();
    for (const auto &p : bundle.proposals) {
        proposals.push_back(json{{"box", {p.box.x0, p.box.y0, p.box.x1, p.box.y1}},
                                 {"alpha", p.alpha},
                                 {"beta", p.beta},
                                 {"mask", mask_to_json(p.mask)}});
    }
    json gt = json::array();
    for (const auto &m : bundle.gt_masks) {
        gt.push_back(mask_to_json(m));
    }
    json out{{"schema", kBundleSchema},
             {"image_id", bundle.image_id},
             {"category", bundle.category},
             {"height", bundle.height},
             {"width", bundle.width},
             {"detector_id", bundle.detector_id},
             {"proposals", std::move(proposals)},
             {"gt_masks", std::move(gt)}};
    if (!bundle.metadata.empty()) {
        out["metadata"] = bundle.metadata;
    }
    return out;
}

ProposalBundle bundle_from_json(const json &node) {
    const std::string root = "bundle";
    if (!node.is_object()) {
        parse_fail(root, "expected an object");
    }
    const auto schema = get_string(node, "schema", root);
    if (schema != kBundleSchema) {
        throw Error(ErrorCode::VersionError,
                    fmt::format("unsupported bundle schema '{}' (expected '{}')", schema, kBundleSchema));
    }
    ProposalBundle b;
    b.image_id = get_string(node, "image_id", root);
    b.category = get_string(node, "category", root);
    b.height = get_dimension(node, "height", root);
    b.width = get_dimension(node, "width", root);
    b.detector_id = get_string(node, "detector_id", root);

    const auto check_dims = [&](const BinaryMask &m, const std::string &where) {
        if (m.height != b.height || m.width != b.width) {
            parse_fail(where, fmt::format("mask is {}x{}, image is {}x{}", m.height, m.width, b.height, b.width));
        }
    };

    const auto &gt = get_array(node, "gt_masks", root);
    if (gt.empty()) {
        parse_fail("bundle.gt_masks", "at least one ground-truth mask is required");
    }
    for (std::size_t j = 0; j < gt.size(); ++j) {
        const auto where = fmt::format("gt_masks[{}]", j);
        b.gt_masks.push_back(mask_from_json(gt[j], where));
        check_dims(b.gt_masks.back(), where);
    }

    const auto &proposals = get_array(node, "proposals", root);
    for (std::size_t i = 0; i < proposals.size(); ++i) {
        const auto where = fmt::format("proposals[{}]", i);
        const auto &pj = proposals[i];
        Proposal p;
        const auto &box = get_array(pj, "box", where);
        if (box.size() != 4 || !std::all_of(box.begin(), box.end(), [](const json &v) { return v.is_number(); })) {
            parse_fail(where + ".box", "expected [x0, y0, x1, y1]");
        }
        p.box = Box{box[0].get<double>(), box[1].get<double>(), box[2].get<double>(), box[3].get<double>()};
        if (!(p.box.x0 >= 0 && p.box.x0 < p.box.x1 && p.box.x1 <= b.width && p.box.y0 >= 0 &&
              p.box.y0 < p.box.y1 && p.box.y1 <= b.height)) {
            parse_fail(where + ".box", "box must satisfy 0 <= x0 < x1 <= width and 0 <= y0 < y1 <= height");
        }
        p.alpha = get_number(pj, "alpha", where);
        p.beta = get_number(pj, "beta", where);
        if (!(p.alpha >= 0 && p.alpha <= 1)) {
            parse_fail(where + ".alpha", "must lie in [0, 1]");
        }
        if (!(p.beta >= 0 && p.beta <= 1)) {
            parse_fail(where + ".beta", "must lie in [0, 1]");
        }
        p.mask = mask_from_json(field(pj, "mask", where), where + ".mask");
        check_dims(p.mask, where + ".mask");
        b.proposals.push_back(std::move(p));
    }

    if (const auto it = node.find("metadata"); it != node.end()) {
        if (!it->is_object()) {
            parse_fail("bundle.metadata", "expected an object of strings");
        }
        for (const auto &[key, value] : it->items()) {
            if (!value.is_string()) {
                parse_fail("bundle.metadata." + key, "expected a string");
            }
            b.metadata.emplace(key, value.get<std::string>());
        }
    }
    return b;
}

ProposalBundle parse_bundle(std::string_view text, std::string_view source) {
    const auto node = parse_json(text, source);
    try {
        return bundle_from_json(node);
    } catch (const Error &e) {
        throw Error(e.code(), fmt::format("{}: {}", source, e.what()));
    }
}

std::string serialize_bundle(const ProposalBundle &bundle) { return bundle_to_json(bundle).dump(); }

ProposalBundle load_bundle(const std::filesystem::path &path) { return parse_bundle(read_file(path), path.string()); }

void save_bundle(const ProposalBundle &bundle, const std::filesystem::path &path) {
    write_file(path, serialize_bundle(bundle) + "\n");
}

BinaryMask load_mask(const std::filesystem::path &path) {
    return mask_from_json(parse_json(read_file(path), path.string()), path.string());
}

void save_mask(const BinaryMask &mask, const std::filesystem::path &path) {
    write_file(path, mask_to_json(mask).dump() + "\n");
}

ScoringRequest to_request(const ProposalBundle &bundle) {
    return ScoringRequest{bundle.image_id, bundle.category, bundle.gt_masks, bundle.proposals};
}

json score_to_json(const ScoreResult &result) {
    return json{{"detectability", result.detectability},
                {"score", result.score},
                {"best_subset", result.best_subset},
                {"kept_count", result.kept_count},
                {"subsets_evaluated", result.subsets_evaluated},
                {"intersection", result.best.intersection},
                {"union", result.best.union_area},
                {"kept_indices", result.kept_indices}};
}

ScoreResult score_from_json(const json &node, const std::string &where) {
    ScoreResult r;
    r.score = get_number(node, "score", where);
    if (!(r.score >= 0 && r.score <= 1)) {
        parse_fail(where + ".score", "must lie in [0, 1]");
    }
    r.detectability = node.contains("detectability") ? get_number(node, "detectability", where) : 1.0 - r.score;
    const auto optional_count = [&](const char *name) -> std::uint64_t {
        if (!node.contains(name)) {
            return 0;
        }
        const auto v = get_int(node, name, where);
        if (v < 0) {
            parse_fail(where + "." + name, "must be >= 0");
        }
        return static_cast<std::uint64_t>(v);
    };
    r.kept_count = optional_count("kept_count");
    r.subsets_evaluated = optional_count("subsets_evaluated");
    r.best.intersection = optional_count("intersection");
    r.best.union_area = optional_count("union");
    const auto index_list = [&](const char *name) {
        std::vector<std::size_t> out;
        if (!node.contains(name)) {
            return out;
        }
        const auto &arr = get_array(node, name, where);
        for (const auto &v : arr) {
            if (!v.is_number_unsigned()) {
                parse_fail(where + "." + name, "expected non-negative integers");
            }
            out.push_back(v.get<std::size_t>());
        }
        return out;
    };
    r.best_subset = index_list("best_subset");
    r.kept_indices = index_list("kept_indices");
    return r;
}

}  // namespace seamcam
