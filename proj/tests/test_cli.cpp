// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0
//
// Runs the spinrect executable end to end.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "spinrect/spt.hpp"
#include "spinrect/synth.hpp"
#include "test_util.hpp"

using spinrect::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

// Runs the CLI with stderr folded into stdout.
Run cli(const std::string& args) {
  const std::string command = std::string(SPINRECT_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = ::popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int raw = ::pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("exponents prints the bank") {
  for (std::size_t k : {0u, 1u, 6u}) {
    CAPTURE(k);
    const auto r = cli("exponents --k " + std::to_string(k));
    REQUIRE(r.status == 0);
    const auto rows = lines(r.out);
    const auto betas = spinrect::spt::ExponentBank::build(k).betas();
    REQUIRE(rows.size() == 2 * k + 1);
    for (std::size_t i = 0; i < rows.size(); ++i) CHECK(std::stod(rows[i]) == doctest::Approx(betas[i]).epsilon(0.01));
    CHECK(rows[k] == "1.00");
  }
}

TEST_CASE("usage errors exit nonzero with help") {
  SUBCASE("no subcommand") {
    const auto r = cli("");
    CHECK(r.status != 0);
    CHECK(r.out.find("gen-data") != std::string::npos);
  }
  SUBCASE("unknown flag") {
    const auto r = cli("exponents --k 6 --bogus 1");
    CHECK(r.status != 0);
    CHECK(r.out.find("--bogus") != std::string::npos);
  }
  SUBCASE("missing required option") {
    CHECK(cli("exponents").status != 0);
  }
  SUBCASE("out-of-range severity") {
    TempDir tmp("cli");
    CHECK(cli("gen-data --out " + tmp.str() + "/c --count 2 --severity 1.5").status != 0);
    CHECK_FALSE(fs::exists(tmp.path() / "c"));
  }
}

TEST_CASE("runtime errors name their cause") {
  TempDir tmp("cli");
  SUBCASE("missing config file") {
    const auto r = cli("train --config " + tmp.str() + "/absent.cfg");
    CHECK(r.status == 1);
    CHECK(r.out.find("absent.cfg") != std::string::npos);
  }
  SUBCASE("unknown mode") {
    const auto r = cli("train --mode warp --epochs 0");
    CHECK(r.status == 1);
    CHECK(r.out.find("warp") != std::string::npos);
  }
  SUBCASE("missing corpus") {
    const auto r = cli("eval --checkpoint " + tmp.str() + "/none.bin --corpus " + tmp.str());
    CHECK(r.status == 1);
  }
}

TEST_CASE("gen-data is deterministic and readable") {
  TempDir tmp("cli");
  const std::string common = " --count 6 --mix combined --severity 0.7 --seed 41";
  REQUIRE(cli("gen-data --out " + tmp.str() + "/a" + common).status == 0);
  REQUIRE(cli("gen-data --out " + tmp.str() + "/b" + common).status == 0);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(tmp.path() / "a")) {
    CHECK(slurp(e.path()) == slurp(tmp.path() / "b" / e.path().filename()));
    ++files;
  }
  CHECK(files == 7);
  const auto entries = spinrect::synth::load_corpus(tmp.path() / "a");
  REQUIRE(entries.size() == 6);
  const spinrect::synth::CorpusSpec spec{6, spinrect::synth::Mix::combined, 0.7, 41};
  for (std::size_t i = 0; i < 6; ++i) CHECK(entries[i].label == spinrect::synth::generate_sample(spec, i).label);
}

TEST_CASE("rectify") {
  TempDir tmp("cli");
  const auto image = spinrect::synth::render_text("5072", 48, 16);
  const fs::path in = tmp.path() / "in.pgm";
  spinrect::synth::write_pgm(in, image);
  SUBCASE("mode none copies the input") {
    REQUIRE(cli("rectify --mode none --input " + in.string() + " --output " + tmp.str() + "/out.pgm").status == 0);
    CHECK(slurp(tmp.path() / "out.pgm") == slurp(in));
  }
  SUBCASE("spin writes an image of the same size and its intermediates") {
    const auto r = cli("rectify --mode spin --seed 3 --input " + in.string() + " --output " + tmp.str() +
                       "/out.pgm --dump-intermediate " + tmp.str() + "/dump");
    REQUIRE(r.status == 0);
    const auto out = spinrect::synth::read_pgm(tmp.path() / "out.pgm");
    CHECK(out.width == image.width);
    CHECK(out.height == image.height);
    CHECK(r.out.find("intermediate,") != std::string::npos);
    CHECK_FALSE(fs::is_empty(tmp.path() / "dump"));
  }
}

TEST_CASE("train and eval round trip") {
  TempDir tmp("cli");
  const std::string corpus = tmp.str() + "/corpus";
  REQUIRE(cli("gen-data --out " + corpus + " --count 8 --mix chromatic --severity 0.5 --seed 2").status == 0);
  const auto t = cli("train --mode spin --train " + corpus + " --test " + corpus +
                     " --epochs 1 --batch_size 4 --seed 5 --out " + tmp.str() + "/run");
  REQUIRE(t.status == 0);
  CHECK(t.out.find("steps,2") != std::string::npos);
  const auto acc_line = t.out.substr(t.out.find("seq_acc,"));
  const auto e = cli("eval --checkpoint " + tmp.str() + "/run/checkpoint.bin --corpus " + corpus);
  REQUIRE(e.status == 0);
  const auto rows = lines(e.out);
  REQUIRE(rows.size() >= 2);
  CHECK(rows[0] == "class,correct,total,acc");
  CHECK(rows[1].rfind("all,", 0) == 0);
  CHECK(rows[1].find(",8,") != std::string::npos);
  // Evaluating the saved checkpoint reproduces the end-of-training accuracy.
  const double trained = std::stod(acc_line.substr(8));
  const double reloaded = std::stod(rows[1].substr(rows[1].rfind(',') + 1));
  CHECK(trained == reloaded);
}
