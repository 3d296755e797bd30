// Copyright 2026 The tvrag Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace {

namespace fs = std::filesystem;

struct CliRun {
    int status = -1;
    std::string out;
};

CliRun run(const std::string& args) {
    const std::string cmd = std::string(TVRAG_CLI_PATH) + " " + args + " 2>/dev/null";
    CliRun r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    const int raw = pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

std::string data(const std::string& name) { return (fs::path(TVRAG_TEST_DATA) / name).string(); }

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("tvrag_cli_" + std::to_string(::getpid()));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string tmp(const std::string& name) const { return (dir_ / name).string(); }

    std::string build_index() {
        const std::string idx = tmp("idx.bin");
        const CliRun r = run("index --captions " + data("captions_90s.jsonl") + " --transcripts " +
                          data("transcripts_90s.jsonl") + " --out " + idx);
        EXPECT_EQ(r.status, 0) << r.out;
        return idx;
    }

private:
    fs::path dir_;
};

TEST_F(Cli, IngestSummary) {
    const CliRun r = run("ingest --captions " + data("captions_90s.jsonl") + " --transcripts " + data("transcripts_90s.jsonl"));
    ASSERT_EQ(r.status, 0);
    EXPECT_TRUE(nlohmann::json::parse(r.out).is_object());
}

TEST_F(Cli, IndexQueryDeterministic) {
    const std::string idx = build_index();
    const std::string q = "query --index " + idx + " --question 'what does the chef cook' --top-m 2";
    const CliRun a = run(q);
    const CliRun b = run(q);
    ASSERT_EQ(a.status, 0) << a.out;
    EXPECT_EQ(a.out, b.out);
    const auto j = nlohmann::json::parse(a.out);
    EXPECT_TRUE(j.contains("retrieval"));
    EXPECT_TRUE(j.contains("prompt"));
}

TEST_F(Cli, EvalSkipsBadLine) {
    const std::string idx = build_index();
    const CliRun r = run("eval --index " + idx + " --queries " + data("queries.jsonl") + " --top-m 2");
    ASSERT_EQ(r.status, 0) << r.out;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j.at("skipped").get<int>(), 1);
}

TEST_F(Cli, InputErrorsExitTwo) {
    const CliRun r = run("ingest --captions " + data("captions_90s.jsonl") + " --transcripts " + tmp("missing.jsonl"));
    EXPECT_EQ(r.status, 2);
    EXPECT_EQ(nlohmann::json::parse(r.out).at("kind"), "IoError");
    EXPECT_EQ(run("frobnicate").status, 2);
}

TEST_F(Cli, WrongWeightsExitThree) {
    const std::string idx = build_index();
    const std::string w = tmp("w.json");
    ASSERT_EQ(run("index --captions " + data("captions_90s.jsonl") + " --transcripts " + data("transcripts_90s.jsonl") +
                  " --out " + tmp("other.bin") + " --seed 77 --save-weights " + w)
                  .status,
              0);
    const CliRun r = run("query --index " + idx + " --question kite --weights " + w);
    EXPECT_EQ(r.status, 3) << r.out;
}

} // namespace
