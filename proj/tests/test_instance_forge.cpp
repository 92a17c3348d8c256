#include "pcc/instance_forge.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>
#include <numeric>

using namespace pcc;

namespace {

// Builds a class whose only method spans the given body lines. Line numbers
// in the result are 1-based file lines: line 1 is "class A {", line 2 the
// signature, then the body, then the closing braces.
MethodUnit method_with_body(const std::vector<std::string>& body) {
    std::string src = "class A {\nvoid m(int p) {\n";
    for (const auto& l : body) src += l + "\n";
    src += "}\n}\n";
    auto ms = extract_methods(src);
    EXPECT_EQ(ms.size(), 1u);
    return ms.front();
}

std::vector<std::vector<std::size_t>> lines_of(const std::vector<MaskSegment>& segs) {
    std::vector<std::vector<std::size_t>> out;
    for (const auto& s : segs) out.push_back(s.line_numbers);
    return out;
}

Provenance prov() { return {"repo", std::string(40, 'c'), "dev-1", 1700000000, "A.java"}; }

}  // namespace

TEST(Segment, RunningExample) {
    // Lines 3..15 carry statements; line 6 is empty.
    std::vector<std::string> body;
    for (int l = 3; l <= 15; ++l) body.push_back(l == 6 ? "" : "x" + std::to_string(l) + " = 1;");
    auto m = method_with_body(body);
    auto segs = segment({4, 5, 6, 7, 8, 14}, m);
    EXPECT_EQ(lines_of(segs), (std::vector<std::vector<std::size_t>>{{4, 5, 6, 7}, {8}, {14}}));
    EXPECT_EQ(segs[0].counted_line_count, 3u);
    EXPECT_EQ(segs[0].kind, SegmentKind::block);
    EXPECT_EQ(segs[1].kind, SegmentKind::block);
    EXPECT_EQ(segs[2].kind, SegmentKind::isolated_line);
}

TEST(Segment, SingleLineIsIsolated) {
    std::vector<std::string> body(10, "a = b + c;");
    auto segs = segment({10}, method_with_body(body));
    ASSERT_EQ(segs.size(), 1u);
    EXPECT_EQ(segs[0].kind, SegmentKind::isolated_line);
    EXPECT_EQ(segs[0].line_numbers, std::vector<std::size_t>{10});
}

TEST(Segment, GreedyBlocksOfThree) {
    std::vector<std::string> body(6, "a = b + c;");
    auto m = method_with_body(body);
    auto segs = segment({3, 4, 5, 6, 7, 8}, m);
    EXPECT_EQ(lines_of(segs), (std::vector<std::vector<std::size_t>>{{3, 4, 5}, {6, 7, 8}}));
}

TEST(Segment, SingleTokenLinesAreAbsorbedAndAllUncountedRunsDropped) {
    auto m = method_with_body({"if (a) {", "b = 1;", "}", "c = 2;", "d = 3;", "{", "", "}"});
    // Lines 3, 4, 6 and 7 are counted, so the block closes before line 7 and
    // the "}" on line 5 rides along.
    auto segs = segment({3, 4, 5, 6, 7, 8}, m);
    EXPECT_EQ(lines_of(segs), (std::vector<std::vector<std::size_t>>{{3, 4, 5, 6}, {7, 8}}));
    EXPECT_TRUE(segment({8, 9, 10}, m).empty());
}

TEST(Segment, PartitionsCountedRuns) {
    std::mt19937_64 rng(3);
    std::vector<std::string> pool{"a = b;", ";", "", "call(x, y);", "return;"};
    for (int iter = 0; iter < 300; ++iter) {
        std::vector<std::string> body(20);
        for (auto& l : body) l = pool[rng() % pool.size()];
        auto m = method_with_body(body);
        std::vector<std::size_t> L;
        for (std::size_t l = 3; l <= 22; ++l) {
            if (rng() % 2) L.push_back(l);
        }
        auto segs = segment(L, m);
        std::vector<std::size_t> seen;
        for (const auto& s : segs) {
            EXPECT_LE(s.counted_line_count, 3u);
            if (s.kind == SegmentKind::isolated_line) EXPECT_EQ(s.line_numbers.size(), 1u);
            if (s.kind == SegmentKind::block) EXPECT_GE(s.counted_line_count, 1u);
            seen.insert(seen.end(), s.line_numbers.begin(), s.line_numbers.end());
        }
        auto sorted = seen;
        std::sort(sorted.begin(), sorted.end());
        EXPECT_EQ(std::adjacent_find(sorted.begin(), sorted.end()), sorted.end());
        for (auto l : seen) EXPECT_TRUE(std::binary_search(L.begin(), L.end(), l));
        // Every counted line of L is covered.
        for (auto l : L) {
            if (m.tokens_on_line(l) >= 2) EXPECT_TRUE(std::binary_search(sorted.begin(), sorted.end(), l));
        }
    }
}

TEST(Mask, FourTokensForcesThree) {
    auto m = method_with_body({"a = b;", "x = y;"});
    std::mt19937_64 rng(1);
    for (int i = 0; i < 200; ++i) {
        auto inst = mask({{3}, 1, SegmentKind::isolated_line}, m, prov(), rng);
        ASSERT_TRUE(inst);
        EXPECT_EQ(inst->N, 4u);
        EXPECT_EQ(inst->n, 3u);
        EXPECT_EQ(inst->target, "= b;");
    }
}

TEST(Mask, ThreeTokensOrFewerIsUnmaskable) {
    auto m = method_with_body({"a++;", "return;"});
    std::mt19937_64 rng(1);
    EXPECT_FALSE(mask({{3}, 1, SegmentKind::isolated_line}, m, prov(), rng));
    EXPECT_FALSE(mask({{4}, 1, SegmentKind::isolated_line}, m, prov(), rng));
}

TEST(Mask, SixtyTokensStaysWithinBounds) {
    std::string line = "return f(a";
    for (int i = 0; i < 27; ++i) line += ", a";
    line += ");";  // 4 + 27 * 2 + 2 = 60 tokens
    auto m = method_with_body({line});
    MaskSegment seg{{3}, 1, SegmentKind::isolated_line};
    std::mt19937_64 rng(5);
    std::map<std::size_t, int> hist;
    for (int i = 0; i < 10000; ++i) {
        auto inst = mask(seg, m, prov(), rng);
        ASSERT_TRUE(inst);
        ASSERT_EQ(inst->N, 60u);
        ASSERT_GE(inst->n, 3u);
        ASSERT_LE(inst->n, 50u);
        ++hist[inst->n];
    }
    EXPECT_EQ(hist.size(), 48u);
    EXPECT_EQ(hist.begin()->first, 3u);
    EXPECT_EQ(hist.rbegin()->first, 50u);
}

TEST(Mask, ListingExample) {
    auto m = method_with_body({"int result;", "result = a + b;", "return result;"});
    MaskSegment seg{{4}, 1, SegmentKind::isolated_line};
    bool found = false;
    for (std::uint64_t seed = 0; seed < 64 && !found; ++seed) {
        std::mt19937_64 rng(seed);
        auto inst = mask(seg, m, prov(), rng);
        ASSERT_TRUE(inst);
        if (inst->n != 4) continue;
        found = true;
        EXPECT_EQ(inst->target, "a + b;");
        EXPECT_NE(inst->context.find("result = <FILL_ME>\n"), std::string::npos);
    }
    EXPECT_TRUE(found);
}

TEST(Mask, ReconstructsMethodAndIsDeterministic) {
    auto m = method_with_body({"int s = 0; // running", "for (int i = 0; i < p; i++) {", "  s += i * /* x */ 2;", "}",
                               "return s;"});
    MaskSegment seg{{3, 4, 5, 6}, 3, SegmentKind::block};
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 a(seed), b(seed);
        auto x = mask(seg, m, prov(), a);
        auto y = mask(seg, m, prov(), b);
        ASSERT_TRUE(x && y);
        EXPECT_EQ(*x, *y);
        EXPECT_EQ(x->reconstruct(), m.text);
                EXPECT_EQ(token_texts(x->target).size(), x->n);
        auto first = x->context.find(kFillSentinel);
        ASSERT_NE(first, std::string::npos);
        EXPECT_EQ(x->context.find(kFillSentinel, first + 1), std::string::npos);
        EXPECT_EQ(x->instance_id.size(), 32u);
    }
}

TEST(Mask, RefusesMethodsThatAlreadyHoldTheSentinel) {
    auto m = method_with_body({"String s = \"<FILL_ME>\" + x + y;"});
    std::mt19937_64 rng(1);
    EXPECT_FALSE(mask({{3}, 1, SegmentKind::isolated_line}, m, prov(), rng));
}

TEST(CompletionInstanceJson, ExactFieldNames) {
    auto m = method_with_body({"result = a + b;"});
    std::mt19937_64 rng(1);
    auto inst = mask({{3}, 1, SegmentKind::isolated_line}, m, prov(), rng);
    ASSERT_TRUE(inst);
    nlohmann::json j = *inst;
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    EXPECT_EQ(keys, (std::vector<std::string>{"N", "author", "context", "file", "id", "kind", "n", "repo", "sha",
                                              "signature", "target", "ts"}));
    EXPECT_EQ(j["kind"], "isolated-line");
    EXPECT_EQ(j.get<CompletionInstance>(), *inst);
}

TEST(MaskLengthSampler, FitsApacheTargets) {
    MaskLengthSampler s(MaskLengthDistribution{});
    EXPECT_NEAR(s.expected_mean(), 11.0, 1e-6);
    std::mt19937_64 rng(11);
    std::vector<std::size_t> draws(20000);
    for (auto& d : draws) d = s(rng);
    double mean = std::accumulate(draws.begin(), draws.end(), 0.0) / static_cast<double>(draws.size());
    std::nth_element(draws.begin(), draws.begin() + draws.size() / 2, draws.end());
    EXPECT_NEAR(mean, 11.0, 0.3);
    EXPECT_EQ(draws[draws.size() / 2], 8u);
    EXPECT_EQ(*std::min_element(draws.begin(), draws.end()), 3u);
    EXPECT_LE(*std::max_element(draws.begin(), draws.end()), 50u);
}

TEST(MaskLengthSampler, DegenerateIsConstant) {
    MaskLengthSampler s(MaskLengthDistribution{3, 3, 3, 3});
    std::mt19937_64 rng(2);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(s(rng), 3u);
}

TEST(GenerateGeneric, OneMaskableLineGivesOneInstance) {
    auto m = method_with_body({"result = a + b;"});
    MaskLengthSampler s(MaskLengthDistribution{});
    std::mt19937_64 rng(4);
    auto out = generate_generic(m, s, prov(), rng);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].N, 6u);
    EXPECT_GE(out[0].n, 3u);
    EXPECT_LE(out[0].n, 5u);
}

TEST(GenerateGeneric, AtMostThreeDistinctSpans) {
    std::vector<std::string> body;
    for (int i = 0; i < 12; ++i) body.push_back("v" + std::to_string(i) + " = compute(p, " + std::to_string(i) + ");");
    auto m = method_with_body(body);
    MaskLengthSampler s(MaskLengthDistribution{});
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        std::mt19937_64 rng(seed);
        auto out = generate_generic(m, s, prov(), rng);
        ASSERT_GE(out.size(), 1u);
        ASSERT_LE(out.size(), 3u);
        std::set<std::string> contexts;
        for (const auto& inst : out) {
            EXPECT_TRUE(contexts.insert(inst.context).second);
            EXPECT_GE(inst.n, 3u);
            EXPECT_LE(inst.n, std::min<std::size_t>(50, inst.N - 1));
            EXPECT_EQ(inst.reconstruct(), m.text);
        }
    }
}

TEST(Mlm, FifteenPercentCeiling) {
    std::mt19937_64 rng(9);
    auto m12 = method_with_body({"a = b;"});
    ASSERT_EQ(m12.tokens.size(), 12u);
    EXPECT_EQ(mlm_pretrain_instances(m12, rng).masked, 2u);
    auto m20 = method_with_body({"a = b;", "c = d;", "e = fg;"});
    ASSERT_EQ(m20.tokens.size(), 20u);
    auto rec = mlm_pretrain_instances(m20, rng);
    EXPECT_EQ(rec.masked, 3u);
    EXPECT_NE(rec.input.find("<extra_id_2>"), std::string::npos);
    EXPECT_EQ(rec.input.find("<extra_id_3>"), std::string::npos);
    MethodUnit tiny = m12;
    tiny.tokens.resize(1);
    EXPECT_EQ(mlm_pretrain_instances(tiny, rng).masked, 1u);
    EXPECT_EQ(mlm_pretrain_instances(tiny, rng).input, "<extra_id_0>");
}

TEST(Mlm, SeededDeterminism) {
    auto m = method_with_body({"a = b;", "c = d;", "e = f + g;"});
    std::mt19937_64 a(3), b(3);
    auto x = mlm_pretrain_instances(m, a);
    auto y = mlm_pretrain_instances(m, b);
    EXPECT_EQ(x.input, y.input);
    EXPECT_EQ(x.target, y.target);
}
