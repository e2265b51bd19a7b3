#include <gtest/gtest.h>

#include "fakes.hpp"
#include "socratic/dialogue.hpp"
#include "socratic/errors.hpp"
#include "socratic/serialization.hpp"

using namespace socratic;
namespace fs = std::filesystem;

TEST(Serialization, ContextRoundTrip) {
    auto ctx = fakes::sample_context();
    ctx.constraints = {"focus on IP addresses only"};
    ctx.prior_question = "What is a router?";
    const json j = ctx;
    EXPECT_EQ(j.get<GenerationContext>(), ctx);
}

TEST(Serialization, AbsentOptionalsStayAbsent) {
    GenerationContext ctx;
    ctx.topic = "Networks";
    ctx.concepts = {"router"};
    const auto back = json(ctx).get<GenerationContext>();
    EXPECT_FALSE(back.student_level.has_value());
    EXPECT_FALSE(back.materials.has_value());
}

TEST(Serialization, LoadContextResolvesFiles) {
    const auto dir = fakes::fresh_dir("ctx");
    write_file_atomic(dir / "concepts.txt", "IP address\r\nrouter\n\n  \npacket\n");
    write_file_atomic(dir / "notes.md", "# Notes\n\nRouters forward packets.\n");
    const json doc = json::parse(R"({
        "topic": "Computer networks",
        "concepts_file": "concepts.txt",
        "level": "8th grade",
        "materials": [{"path": "notes.md", "origin": "teacher_notes"}]
    })");
    const auto ctx = load_context(doc, dir);
    EXPECT_EQ(ctx.concepts, (std::vector<std::string>{"IP address", "router", "packet"}));
    ASSERT_TRUE(ctx.materials.has_value());
    EXPECT_EQ(ctx.materials->at(0).name, "notes.md");
    EXPECT_EQ(ctx.materials->at(0).body, "# Notes\n\nRouters forward packets.\n");
    EXPECT_EQ(ctx.materials->at(0).origin, MaterialOrigin::TeacherNotes);
}

TEST(Serialization, ConfigAcceptsLabelOrObject) {
    const ExperimentConfig cfg{IterationRegime::fixed(10), false, true};
    EXPECT_EQ(json(cfg).get<ExperimentConfig>(), cfg);
    EXPECT_EQ(json("F10/L0/M1").get<ExperimentConfig>(), cfg);
    EXPECT_EQ(json(cfg).at("label"), "F10/L0/M1");
}

TEST(Serialization, TraceRoundTripAndLayout) {
    auto agents = fakes::make_agent_backend({[](const fakes::TagInfo&) { return 3; }});
    const ExperimentConfig cfg{IterationRegime::dynamic(), true, true};
    const auto trace = dialogue::run_dialogue(fakes::sample_context(), cfg, *agents, 99, 1);
    const json j = trace;
    EXPECT_EQ(j.get<DialogueTrace>(), trace);

    const json attempt = attempt_to_json(trace);
    EXPECT_EQ(attempt.at("attempt_id"), 1);
    EXPECT_EQ(attempt.at("termination"), "EducatorApproved");
    const auto& iterations = attempt.at("iterations");
    ASSERT_EQ(iterations.size(), 3u);
    EXPECT_EQ(iterations[0].at("index"), 0);
    EXPECT_TRUE(iterations[0].at("student").contains("question"));
    EXPECT_TRUE(iterations[0].at("student").contains("rationale"));
    EXPECT_TRUE(iterations[0].at("teacher").contains("feedback"));
    EXPECT_EQ(iterations[2].at("teacher").at("approval"), true);
    EXPECT_EQ(attempt.at("final_question"), iterations[2].at("student").at("question"));
}

TEST(Serialization, AtomicWriteReplacesContents) {
    const auto dir = fakes::fresh_dir("atomic");
    write_file_atomic(dir / "a" / "f.txt", "one");
    write_file_atomic(dir / "a" / "f.txt", "two");
    EXPECT_EQ(read_file(dir / "a" / "f.txt"), "two");
    EXPECT_FALSE(fs::exists(dir / "a" / "f.txt.tmp"));
    EXPECT_THROW(read_file(dir / "missing"), ValidationError);
}
