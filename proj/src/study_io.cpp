#include "seamcam/study_io.hpp"

#include <fmt/format.h>

#include <fstream>
#include <ostream>
#include <sstream>

#include "seamcam/error.hpp"

namespace seamcam {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const std::string &where, const std::string &what) {
    throw Error(ErrorCode::ParseError, fmt::format("{}: {}", where, what));
}

std::string get_string(const json &node, const char *name, const std::string &where) {
    const auto it = node.find(name);
    if (it == node.end() || !it->is_string()) {
        parse_fail(fmt::format("{}.{}", where, name), "expected a string");
    }
    return it->get<std::string>();
}

Choice get_choice(const json &node, const char *name, const std::string &where) {
    const auto text = get_string(node, name, where);
    const auto c = parse_choice(text);
    if (!c) {
        parse_fail(fmt::format("{}.{}", where, name), fmt::format("expected \"a\" or \"b\", got \"{}\"", text));
    }
    return *c;
}

}  // namespace

std::vector<json> read_json_documents(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, fmt::format("cannot open '{}'", path.string()));
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    std::vector<json> docs;
    if (first == std::string::npos) {
        return docs;
    }
    if (text[first] == '[') {
        json arr;
        try {
            arr = json::parse(text);
        } catch (const json::exception &e) {
            parse_fail(path.string(), e.what());
        }
        for (auto &item : arr) {
            docs.push_back(std::move(item));
        }
        return docs;
    }
    std::istringstream lines(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(lines, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            docs.push_back(json::parse(line));
        } catch (const json::exception &e) {
            parse_fail(fmt::format("{}:{}", path.string(), lineno), e.what());
        }
    }
    return docs;
}

json vote_to_json(const VoteRecord &vote) {
    json j{{"pair_id", vote.pair_id},
           {"participant_id", vote.participant_id},
           {"choice", to_string(vote.choice)},
           {"is_catch", vote.is_catch},
           {"catch_expected", nullptr},
           {"response_ms", nullptr}};
    if (vote.catch_expected) {
        j["catch_expected"] = to_string(*vote.catch_expected);
    }
    if (vote.response_ms) {
        j["response_ms"] = *vote.response_ms;
    }
    return j;
}

VoteRecord vote_from_json(const json &node, const std::string &where) {
    if (!node.is_object()) {
        parse_fail(where, "expected an object");
    }
    VoteRecord v;
    v.pair_id = get_string(node, "pair_id", where);
    v.participant_id = get_string(node, "participant_id", where);
    v.choice = get_choice(node, "choice", where);
    const auto is_catch = node.find("is_catch");
    if (is_catch != node.end()) {
        if (!is_catch->is_boolean()) {
            parse_fail(where + ".is_catch", "expected a boolean");
        }
        v.is_catch = is_catch->get<bool>();
    }
    const auto expected = node.find("catch_expected");
    if (expected != node.end() && !expected->is_null()) {
        v.catch_expected = get_choice(node, "catch_expected", where);
    }
    if (v.is_catch != v.catch_expected.has_value()) {
        parse_fail(where + ".catch_expected", "must be set exactly when is_catch is true");
    }
    const auto ms = node.find("response_ms");
    if (ms != node.end() && !ms->is_null()) {
        if (!ms->is_number() || ms->get<double>() < 0) {
            parse_fail(where + ".response_ms", "expected a non-negative number");
        }
        v.response_ms = ms->get<double>();
    }
    return v;
}

std::vector<VoteRecord> read_votes(const std::filesystem::path &path) {
    const auto docs = read_json_documents(path);
    std::vector<VoteRecord> votes;
    votes.reserve(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        votes.push_back(vote_from_json(docs[i], fmt::format("{}[{}]", path.filename().string(), i)));
    }
    return votes;
}

void write_votes(std::ostream &out, std::span<const VoteRecord> votes) {
    for (const auto &v : votes) {
        out << vote_to_json(v).dump() << '\n';
    }
}

json pair_to_json(const StudyPair &pair) {
    return json{{"pair_id", pair.pair_id}, {"image_a", pair.image_a}, {"image_b", pair.image_b}, {"species", pair.species}};
}

StudyPair pair_from_json(const json &node, const std::string &where) {
    if (!node.is_object()) {
        parse_fail(where, "expected an object");
    }
    StudyPair p;
    p.pair_id = get_string(node, "pair_id", where);
    p.image_a = get_string(node, "image_a", where);
    p.image_b = get_string(node, "image_b", where);
    if (node.contains("species")) {
        p.species = get_string(node, "species", where);
    }
    return p;
}

std::vector<StudyPair> read_pairs(const std::filesystem::path &path) {
    const auto docs = read_json_documents(path);
    std::vector<StudyPair> pairs;
    pairs.reserve(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        pairs.push_back(pair_from_json(docs[i], fmt::format("{}[{}]", path.filename().string(), i)));
    }
    return pairs;
}

void write_pairs(std::ostream &out, std::span<const StudyPair> pairs) {
    json arr = json::array();
    for (const auto &p : pairs) {
        arr.push_back(pair_to_json(p));
    }
    out << arr.dump(2) << '\n';
}

}  // namespace seamcam
