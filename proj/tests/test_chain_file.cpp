#include <gtest/gtest.h>

#include <json.hpp>

#include "chainhash/chain_file.hpp"
#include "chainhash/errors.hpp"
#include "support.hpp"

namespace chainhash {
namespace {

using testing::numbered_questions;
using testing::numbered_table;

TEST(ChainFile, RoundTripsByteForByte) {
    const auto artifact = make_artifact(numbered_questions(10), numbered_table());
    const auto text = serialize_artifact(artifact);
    const auto back = parse_artifact(text);
    EXPECT_EQ(back.questions, artifact.questions);
    EXPECT_EQ(back.table, artifact.table);
    EXPECT_EQ(back.assignments, artifact.assignments);
    EXPECT_FALSE(back.key_present);
    EXPECT_EQ(serialize_artifact(back), text);
}

TEST(ChainFile, FieldOrderIsFixed) {
    const auto text = serialize_artifact(make_artifact(numbered_questions(2), numbered_table()));
    const auto pos = [&](const char* key) { return text.find(std::string("\"") + key + "\""); };
    EXPECT_LT(pos("protocol_version"), pos("hash_alg"));
    EXPECT_LT(pos("hash_alg"), pos("questions"));
    EXPECT_LT(pos("questions"), pos("table"));
    EXPECT_LT(pos("table"), pos("key_present"));
    EXPECT_LT(pos("key_present"), pos("assignments"));
    EXPECT_NE(text.find("\"chainhash/1\""), std::string::npos);
    EXPECT_EQ(text.back(), '\n');
}

TEST(ChainFile, KeyIsNeverWritten) {
    const auto key = SecretKey::from_string("super-secret-key-material");
    const auto text = serialize_artifact(make_artifact(numbered_questions(3), numbered_table(), key));
    EXPECT_EQ(text.find("super-secret"), std::string::npos);
    EXPECT_TRUE(parse_artifact(text).key_present);
}

TEST(ChainFile, CheckAcceptsUntouchedArtifact) {
    const auto key = SecretKey::from_string("0123456789abcdef");
    EXPECT_NO_THROW(check_artifact(make_artifact(numbered_questions(4), numbered_table())));
    EXPECT_NO_THROW(check_artifact(make_artifact(numbered_questions(4), numbered_table(), key), key));
}

TEST(ChainFile, FlippedIndexIsAnIntegrityError) {
    auto artifact = make_artifact(numbered_questions(10), numbered_table());
    artifact.assignments[3].target_index ^= 1;
    artifact.assignments[3].target_response = artifact.table[artifact.assignments[3].target_index];
    EXPECT_THROW(check_artifact(artifact), IntegrityError);
}

TEST(ChainFile, TamperedResponseOrQuestionIsAnIntegrityError) {
    auto artifact = make_artifact(numbered_questions(3), numbered_table());
    auto response = artifact;
    response.assignments[0].target_response = "forged";
    EXPECT_THROW(check_artifact(response), IntegrityError);

    auto dropped = artifact;
    dropped.assignments.pop_back();
    EXPECT_THROW(check_artifact(dropped), IntegrityError);

    auto swapped = artifact;
    std::swap(swapped.assignments[0], swapped.assignments[1]);
    EXPECT_THROW(check_artifact(swapped), IntegrityError);
}

TEST(ChainFile, EditedTableInTheFileIsCaught) {
    const auto artifact = make_artifact(numbered_questions(5), numbered_table());
    auto j = nlohmann::json::parse(serialize_artifact(artifact));
    j["table"][0] = "changed";
    EXPECT_THROW(check_artifact(parse_artifact(j.dump())), IntegrityError);
}

TEST(ChainFile, KeyMismatches) {
    const auto key = SecretKey::from_string("0123456789abcdef");
    const auto keyed = make_artifact(numbered_questions(6), numbered_table(), key);
    EXPECT_THROW(check_artifact(keyed), ValidationError);
    EXPECT_THROW(check_artifact(keyed, SecretKey::from_string("fedcba9876543210")), IntegrityError);
    const auto plain = make_artifact(numbered_questions(6), numbered_table());
    EXPECT_THROW(check_artifact(plain, key), ValidationError);
}

TEST(ChainFile, SchemaProblemsAreValidationErrors) {
    EXPECT_THROW(parse_artifact("not json"), ValidationError);
    EXPECT_THROW(parse_artifact("{}"), ValidationError);
    auto j = nlohmann::json::parse(serialize_artifact(make_artifact(numbered_questions(2), numbered_table())));
    auto bad_version = j;
    bad_version["protocol_version"] = "chainhash/0";
    EXPECT_THROW(parse_artifact(bad_version.dump()), ValidationError);
    auto bad_alg = j;
    bad_alg["hash_alg"] = "md5";
    EXPECT_THROW(parse_artifact(bad_alg.dump()), ValidationError);
    auto bad_index = j;
    bad_index["assignments"][0]["target_index"] = 256;
    EXPECT_THROW(parse_artifact(bad_index.dump()), ValidationError);
    auto short_table = j;
    short_table["table"].erase(0);
    EXPECT_THROW(parse_artifact(short_table.dump()), ValidationError);
}

}  // namespace
}  // namespace chainhash
