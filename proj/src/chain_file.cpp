#include "chainhash/chain_file.hpp"

#include <json.hpp>

#include "chainhash/errors.hpp"
#include "chainhash/text_io.hpp"

namespace chainhash {

using nlohmann::ordered_json;

ChainArtifact make_artifact(const QuestionSet& questions,
                            const ResponseTable& table,
                            const SecretKey& key) {
    return ChainArtifact{questions, table, key.present(), create_chain(questions, table, key)};
}

std::string serialize_artifact(const ChainArtifact& artifact) {
    ordered_json j;
    j["protocol_version"] = kProtocolVersion;
    j["hash_alg"] = kHashAlgorithm;
    j["questions"] = artifact.questions.questions();
    j["table"] = artifact.table.entries();
    j["key_present"] = artifact.key_present;
    ordered_json assignments = ordered_json::array();
    for (const auto& a : artifact.assignments) {
        ordered_json entry;
        entry["question"] = a.question;
        entry["target_index"] = a.target_index;
        entry["target_response"] = a.target_response;
        assignments.push_back(std::move(entry));
    }
    j["assignments"] = std::move(assignments);
    return j.dump(2) + "\n";
}

ChainArtifact parse_artifact(std::string_view text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("chain file is not valid JSON: ") + e.what());
    }
    try {
        const auto version = j.at("protocol_version").get<std::string>();
        if (version != kProtocolVersion) {
            throw ValidationError("unsupported protocol_version " + version);
        }
        const auto alg = j.at("hash_alg").get<std::string>();
        if (alg != kHashAlgorithm) {
            throw ValidationError("unsupported hash_alg " + alg);
        }
        QuestionSet questions(j.at("questions").get<std::vector<std::string>>());
        ResponseTable table(j.at("table").get<std::vector<std::string>>());
        const bool key_present = j.at("key_present").get<bool>();
        TargetAssignment assignments;
        for (const auto& a : j.at("assignments")) {
            const auto index = a.at("target_index").get<int>();
            if (index < 0 || index > 255) {
                throw ValidationError("target_index out of range: " + std::to_string(index));
            }
            assignments.push_back(Assignment{a.at("question").get<std::string>(),
                                             static_cast<std::uint8_t>(index),
                                             a.at("target_response").get<std::string>()});
        }
        return ChainArtifact{std::move(questions), std::move(table), key_present, std::move(assignments)};
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed chain file: ") + e.what());
    }
}

ChainArtifact load_artifact(const std::filesystem::path& path) {
    return parse_artifact(read_file(path));
}

void check_artifact(const ChainArtifact& artifact, const SecretKey& key) {
    if (artifact.key_present && !key.present()) {
        throw ValidationError("chain was created with a secret key; supply it to verify");
    }
    if (!artifact.key_present && key.present()) {
        throw ValidationError("chain was created without a secret key but one was supplied");
    }
    const auto expected = create_chain(artifact.questions, artifact.table, key);
    if (artifact.assignments.size() != expected.size()) {
        throw IntegrityError("chain has " + std::to_string(artifact.assignments.size()) +
                             " assignments for " + std::to_string(expected.size()) + " questions");
    }
    for (std::size_t i = 0; i < expected.size(); ++i) {
        const auto& got = artifact.assignments[i];
        const auto& want = expected[i];
        if (got.question != want.question) {
            throw IntegrityError("assignment " + std::to_string(i) + " is for a different question");
        }
        if (got.target_index != want.target_index) {
            throw IntegrityError("assignment " + std::to_string(i) + ": stored index " +
                                 std::to_string(got.target_index) + " but hash gives " +
                                 std::to_string(want.target_index));
        }
        if (got.target_response != want.target_response) {
            throw IntegrityError("assignment " + std::to_string(i) + ": response does not match table");
        }
    }
}

}  // namespace chainhash
