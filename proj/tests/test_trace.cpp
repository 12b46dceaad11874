#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "telelink/trace.hpp"

using namespace telelink;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("tmp_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    REQUIRE(bool(out));
    out << content;
}

std::string data_line(double t) {
    std::string s = std::to_string(t);
    // palm_left, palm_right: x y z qw qx qy qz
    s += " 0.4 0.25 0.6 1 0 0 0";
    s += " 0.4 -0.25 0.6 1 0 0 0";
    for (int i = 0; i < 40; ++i) s += " 0.2";
    s += " 0 0 1.45 1 0 0 0";  // head
    s += " 0 0 0";             // rudder
    return s;
}

}  // namespace

TEST_CASE("generated hold trace is neutral and uniformly sampled") {
    const OperatorTrace tr = gen_trace(TraceKind::hold, 2.0, 100.0);
    REQUIRE(tr.samples().size() == 201);
    CHECK(tr.period() == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(tr.start_time() == 0.0);
    CHECK(tr.end_time() == doctest::Approx(2.0).epsilon(1e-12));
    for (const TraceSample& s : tr.samples()) {
        CHECK((s.palm_left.translation - Vec3(0.35, 0.25, 0.7)).norm() == 0.0);
        CHECK((s.palm_right.translation - Vec3(0.35, -0.25, 0.7)).norm() == 0.0);
        CHECK((s.head.translation - Vec3(0.0, 0.0, 1.45)).norm() == 0.0);
        CHECK(s.fingers_left.minCoeff() == 0.2);
        CHECK(s.fingers_left.maxCoeff() == 0.2);
        CHECK(s.rudder.pitch == 0.0);
    }
}

TEST_CASE("zero-order hold lookup clamps and picks the preceding sample") {
    const OperatorTrace tr = gen_trace(TraceKind::hold, 1.0, 100.0);
    CHECK(tr.at(-5.0).t == 0.0);
    CHECK(tr.at(0.0).t == 0.0);
    CHECK(tr.at(0.014999).t == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(tr.at(0.02).t == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(tr.at(99.0).t == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("single-sample traces are allowed and held forever") {
    TraceSample s;
    s.t = 3.0;
    s.fingers_left = VecX::Zero(20);
    s.fingers_right = VecX::Zero(20);
    const OperatorTrace tr = OperatorTrace::from_samples({s});
    CHECK(tr.period() == 0.0);
    CHECK(tr.at(-1.0).t == 3.0);
    CHECK(tr.at(100.0).t == 3.0);
}

TEST_CASE("save and load round-trip bit-exactly") {
    TempFile f("roundtrip.trace");
    const OperatorTrace tr = gen_trace(TraceKind::circle, 3.0, 250.0);
    tr.save(f.path);
    const OperatorTrace back = OperatorTrace::load(f.path);
    REQUIRE(back.samples().size() == tr.samples().size());
    for (std::size_t i = 0; i < tr.samples().size(); ++i) {
        const TraceSample& a = tr.samples()[i];
        const TraceSample& b = back.samples()[i];
        CHECK(a.t == b.t);
        CHECK((a.palm_right.translation - b.palm_right.translation).norm() == 0.0);
        CHECK((a.palm_right.rotation.coeffs() - b.palm_right.rotation.coeffs()).norm() == 0.0);
        CHECK((a.fingers_left - b.fingers_left).norm() == 0.0);
        CHECK((a.fingers_right - b.fingers_right).norm() == 0.0);
        CHECK((a.head.translation - b.head.translation).norm() == 0.0);
        CHECK(a.rudder.pitch == b.rudder.pitch);
        CHECK(a.rudder.yaw == b.rudder.yaw);
    }
}

TEST_CASE("loader enforces the header and column contract") {
    SUBCASE("wrong header version") {
        TempFile f("header.trace");
        write_file(f.path, "# telelink-trace v2\n" + data_line(0.0) + "\n");
        try {
            OperatorTrace::load(f.path);
            FAIL("expected TraceError");
        } catch (const TraceError& e) {
            CHECK(e.line() == 1);
            CHECK(std::string(e.what()).find("header") != std::string::npos);
        }
    }
    SUBCASE("missing header entirely") {
        TempFile f("noheader.trace");
        write_file(f.path, data_line(0.0) + "\n");
        CHECK_THROWS_AS(OperatorTrace::load(f.path), TraceError);
    }
    SUBCASE("empty file") {
        TempFile f("empty.trace");
        write_file(f.path, "");
        CHECK_THROWS_WITH_AS(OperatorTrace::load(f.path), doctest::Contains("empty"),
                             TraceError);
    }
    SUBCASE("header but no samples") {
        TempFile f("nosamples.trace");
        write_file(f.path, "# telelink-trace v1\n# rate 100\n");
        CHECK_THROWS_WITH_AS(OperatorTrace::load(f.path), doctest::Contains("no samples"),
                             TraceError);
    }
    SUBCASE("short line reports its line number and column") {
        TempFile f("short.trace");
        write_file(f.path, "# telelink-trace v1\n" + data_line(0.0) + "\n0.01 0.4 0.25\n");
        try {
            OperatorTrace::load(f.path);
            FAIL("expected TraceError");
        } catch (const TraceError& e) {
            CHECK(e.line() == 3);
            CHECK(std::string(e.what()).find("65") != std::string::npos);
        }
    }
    SUBCASE("long line is rejected") {
        TempFile f("long.trace");
        write_file(f.path, "# telelink-trace v1\n" + data_line(0.0) + " 7.0\n");
        CHECK_THROWS_WITH_AS(OperatorTrace::load(f.path), doctest::Contains("trailing"),
                             TraceError);
    }
    SUBCASE("comments and blank lines between samples are fine") {
        TempFile f("comments.trace");
        write_file(f.path, "# telelink-trace v1\n# a comment\n" + data_line(0.0) +
                               "\n\n# another\n" + data_line(0.01) + "\n");
        CHECK(OperatorTrace::load(f.path).samples().size() == 2);
    }
}

TEST_CASE("loader enforces timing and value validity") {
    SUBCASE("non-increasing timestamps") {
        TempFile f("backwards.trace");
        write_file(f.path,
                   "# telelink-trace v1\n" + data_line(0.01) + "\n" + data_line(0.0) + "\n");
        CHECK_THROWS_WITH_AS(OperatorTrace::load(f.path),
                             doctest::Contains("strictly increasing"), TraceError);
    }
    SUBCASE("jittered spacing") {
        TempFile f("jitter.trace");
        write_file(f.path, "# telelink-trace v1\n" + data_line(0.0) + "\n" + data_line(0.01) +
                               "\n" + data_line(0.03) + "\n");
        CHECK_THROWS_WITH_AS(OperatorTrace::load(f.path),
                             doctest::Contains("uniformly spaced"), TraceError);
    }
    SUBCASE("non-unit quaternion") {
        TempFile f("badquat.trace");
        std::string line = data_line(0.0);
        const auto pos = line.find(" 1 0 0 0");
        line.replace(pos, 8, " 2 0 0 0");
        write_file(f.path, "# telelink-trace v1\n" + line + "\n");
        try {
            OperatorTrace::load(f.path);
            FAIL("expected TraceError");
        } catch (const TraceError& e) {
            CHECK(e.line() == 2);
            CHECK(std::string(e.what()).find("quaternion") != std::string::npos);
        }
    }
    SUBCASE("rudder deflection out of range") {
        TempFile f("badrudder.trace");
        std::string line = data_line(0.0);
        line.replace(line.rfind(" 0 0 0"), 6, " 2 0 0");
        write_file(f.path, "# telelink-trace v1\n" + line + "\n");
        CHECK_THROWS_WITH_AS(OperatorTrace::load(f.path), doctest::Contains("rudder"),
                             TraceError);
    }
}

TEST_CASE("from_samples validates programmatic input") {
    CHECK_THROWS_WITH_AS(OperatorTrace::from_samples({}), doctest::Contains("no samples"),
                         TraceError);

    std::vector<TraceSample> dup(2);
    dup[0].t = dup[1].t = 0.5;
    CHECK_THROWS_WITH_AS(OperatorTrace::from_samples(dup),
                         doctest::Contains("strictly increasing"), TraceError);
}

TEST_CASE("trace kinds parse by name") {
    CHECK(trace_kind_from("hold") == TraceKind::hold);
    CHECK(trace_kind_from("reach") == TraceKind::reach);
    CHECK(trace_kind_from("circle") == TraceKind::circle);
    CHECK(trace_kind_from("locomote") == TraceKind::locomote);
    CHECK_THROWS_AS(trace_kind_from("wander"), std::invalid_argument);
}

TEST_CASE("reach ramps the right palm forward over two seconds") {
    const OperatorTrace tr = gen_trace(TraceKind::reach, 4.0, 100.0);
    CHECK(tr.at(0.0).palm_right.translation.x() == 0.35);
    CHECK(tr.at(1.0).palm_right.translation.x() == doctest::Approx(0.35 + 0.3 * 0.5));
    CHECK(tr.at(2.0).palm_right.translation.x() == doctest::Approx(0.65).epsilon(1e-12));
    CHECK(tr.at(4.0).palm_right.translation.x() == doctest::Approx(0.65).epsilon(1e-12));
    // the left palm and everything else stay put
    CHECK((tr.at(3.0).palm_left.translation - Vec3(0.35, 0.25, 0.7)).norm() == 0.0);
}

TEST_CASE("circle closes after one 5 s period") {
    const OperatorTrace tr = gen_trace(TraceKind::circle, 5.0, 200.0);
    const Vec3 start = tr.samples().front().palm_right.translation;
    const Vec3 end = tr.samples().back().palm_right.translation;
    CHECK((end - start).norm() < 1e-9);
    // quarter period: y offset at its peak
    CHECK(tr.at(1.25).palm_right.translation.y() == doctest::Approx(-0.25 + 0.1).epsilon(1e-6));
}

TEST_CASE("locomote drives each rudder axis in its own window") {
    const OperatorTrace tr = gen_trace(TraceKind::locomote, 10.0, 100.0);
    CHECK(tr.at(0.5).rudder.pitch == 0.0);
    CHECK(tr.at(2.0).rudder.pitch == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(tr.at(2.0).rudder.roll == 0.0);
    CHECK(tr.at(5.0).rudder.roll == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(tr.at(8.0).rudder.yaw == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(tr.at(9.5).rudder.yaw == 0.0);
    // every sample stays within the rudder's validity range
    for (const TraceSample& s : tr.samples()) CHECK_NOTHROW(s.rudder.validate());
}

TEST_CASE("gen_trace rejects nonsense arguments") {
    CHECK_THROWS_AS(gen_trace(TraceKind::hold, 0.0, 100.0), std::invalid_argument);
    CHECK_THROWS_AS(gen_trace(TraceKind::hold, 1.0, -1.0), std::invalid_argument);
}
