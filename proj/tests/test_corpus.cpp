#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "stegica/feature_store.hpp"
#include "stegica/image_io.hpp"
#include "stegica/manifest.hpp"
#include "stegica/model_io.hpp"
#include "stegica/svm.hpp"
#include "test_util.hpp"

using namespace stegica;
namespace fs = std::filesystem;

namespace {

const fs::path kData = fs::path(STEGICA_TEST_SOURCE_DATA);

std::vector<std::uint8_t> slurp(const fs::path& p) { return detail::read_file_bytes(p); }

void write_bytes(const fs::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    out << s;
}

// Decoded image vs PIL's RGB output, sample for sample.
void expect_matches_reference(const fs::path& png, const fs::path& rgb, int w, int h) {
    const Rgb8 px = decode_rgb8(png);
    ASSERT_EQ(px.width, w);
    ASSERT_EQ(px.height, h);
    const auto ref = slurp(rgb);
    ASSERT_EQ(px.samples.size(), ref.size());
    EXPECT_TRUE(std::equal(ref.begin(), ref.end(), px.samples.begin()));
}

} // namespace

TEST(LoadImage, PpmAllWhite2x2) {
    const auto dir = test::scratch_dir("corpus_ppm");
    write_bytes(dir / "w.ppm", std::string("P6\n# comment\n2 2\n255\n") + std::string(12, '\xff'));
    const Image img = load_image(dir / "w.ppm");
    EXPECT_EQ(img.height(), 2);
    EXPECT_EQ(img.width(), 2);
    for (double v : img.raster().data) EXPECT_EQ(v, 1.0);
}

TEST(LoadImage, PngThreeByThreeCropsToTwoByTwo) {
    const Image img = load_image(kData / "rgb_3x3.png");
    EXPECT_EQ(img.height(), 2);
    EXPECT_EQ(img.width(), 2);
    // Pixel (y, x) was written as i*20 + c with i = 3y + x.
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 2; ++x)
            for (int c = 0; c < 3; ++c) EXPECT_EQ(img.at(c, y, x), ((3 * y + x) * 20 + c) / 255.0);
}

TEST(LoadImage, MatchesReferenceDecoder) {
    expect_matches_reference(kData / "rgb_37x29.png", kData / "rgb_37x29.rgb", 37, 29);
    expect_matches_reference(kData / "gradient_64x48.png", kData / "gradient_64x48.rgb", 64, 48);
    expect_matches_reference(kData / "palette_64x48.png", kData / "palette_64x48.rgb", 64, 48);
    expect_matches_reference(kData / "rgba_64x48.png", kData / "rgba_64x48.rgb", 64, 48);

    const Image img = load_image(kData / "rgb_37x29.png");
    EXPECT_EQ(img.height(), 28);
    EXPECT_EQ(img.width(), 36);
    const auto ref = slurp(kData / "rgb_37x29.rgb");
    for (int y = 0; y < 28; ++y)
        for (int x = 0; x < 36; ++x)
            for (int c = 0; c < 3; ++c)
                ASSERT_EQ(img.at(c, y, x), ref[(static_cast<std::size_t>(y) * 37 + x) * 3 + c] / 255.0);
}

TEST(LoadImage, RejectsGrayscaleAndWideSamples) {
    EXPECT_THROW(load_image(kData / "gray_64x48.png"), DataError);
    EXPECT_THROW(load_image(kData / "grayalpha_64x48.png"), DataError);
    try {
        load_image(kData / "rgb16_2x2.png");
        FAIL() << "16-bit PNG accepted";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("bit depth"), std::string::npos);
    }
    const auto dir = test::scratch_dir("corpus_reject");
    write_bytes(dir / "g.pgm", "P5\n2 2\n255\n\x01\x02\x03\x04");
    EXPECT_THROW(load_image(dir / "g.pgm"), DataError);
    write_bytes(dir / "wide.ppm", "P6\n2 2\n65535\n" + std::string(24, '\0'));
    EXPECT_THROW(load_image(dir / "wide.ppm"), DataError);
    write_bytes(dir / "short.ppm", "P6\n2 2\n255\n" + std::string(5, '\0'));
    EXPECT_THROW(load_image(dir / "short.ppm"), DataError);
    write_bytes(dir / "junk.png", "not an image");
    EXPECT_THROW(load_image(dir / "junk.png"), DataError);
    EXPECT_THROW(load_image(dir / "missing.png"), DataError);
    write_bytes(dir / "one.ppm", std::string("P6\n1 1\n255\n") + "abc");
    EXPECT_THROW(load_image(dir / "one.ppm"), DataError);
}

TEST(LoadImage, PngRoundTripAndDeterminism) {
    Rng rng(3);
    const Image img = test::random_image(10, 14, rng);
    const auto dir = test::scratch_dir("corpus_png");
    save_png(img, dir / "a.png");
    save_ppm(img, dir / "a.ppm");
    EXPECT_EQ(load_image(dir / "a.png"), img);
    EXPECT_EQ(load_image(dir / "a.ppm"), img);
    EXPECT_EQ(load_image(dir / "a.png"), load_image(dir / "a.png"));
    EXPECT_EQ(encode_png(img), encode_png(img));
}

TEST(ImageType, EnforcesInvariants) {
    EXPECT_THROW(Image(Raster(3, 4)), DataError);
    EXPECT_THROW(Image(Raster(0, 4)), DataError);
    Raster r(2, 2, 0.5);
    r.at(1, 0, 0) = 1.5;
    EXPECT_THROW(Image(std::move(r)), DataError);
    Raster q(2, 2, 0.5);
    q.at(0, 1, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(Image(std::move(q)), DataError);
}

TEST(Manifest, RoundTrip) {
    DatasetManifest m;
    m.add({"covers/a.png", Label::cover, std::nullopt, Role::train});
    m.add({"stegos/a.png", Label::stego, std::string("scheme_a"), Role::unsplit});
    const auto dir = test::scratch_dir("manifest_rt");
    write_manifest(m, dir / "m.jsonl");
    EXPECT_EQ(read_manifest(dir / "m.jsonl"), m);
}

TEST(Manifest, Errors) {
    const auto dir = test::scratch_dir("manifest_err");
    write_bytes(dir / "bad.jsonl", R"({"path": "a.png", "label": "secret"})"
                                   "\n");
    EXPECT_THROW(read_manifest(dir / "bad.jsonl"), DataError);
    write_bytes(dir / "dup.jsonl", R"({"path": "a.png", "label": "cover"})"
                                   "\n"
                                   R"({"path": "a.png", "label": "stego"})"
                                   "\n");
    EXPECT_THROW(read_manifest(dir / "dup.jsonl"), DataError);
    write_bytes(dir / "role.jsonl", R"({"path": "a.png", "label": "cover", "role": "test"})"
                                    "\n");
    EXPECT_THROW(read_manifest(dir / "role.jsonl"), DataError);
    write_bytes(dir / "syntax.jsonl", "{not json\n");
    EXPECT_THROW(read_manifest(dir / "syntax.jsonl"), DataError);
    write_bytes(dir / "ok.jsonl", "\n" R"({"path": "a.png", "label": "cover"})" "\n\n");
    const auto m = read_manifest(dir / "ok.jsonl");
    ASSERT_EQ(m.size(), 1u);
    EXPECT_EQ(m.entries()[0].role, Role::unsplit);
    EXPECT_FALSE(m.entries()[0].scheme.has_value());
}

TEST(Manifest, BalancedCountsFor2500Pairs) {
    DatasetManifest m;
    for (int i = 0; i < 2500; ++i) {
        m.add({"c/" + std::to_string(i) + ".png", Label::cover, std::nullopt, Role::unsplit});
        m.add({"s/" + std::to_string(i) + ".png", Label::stego, std::string("scheme_a"), Role::unsplit});
    }
    const auto dir = test::scratch_dir("manifest_5000");
    write_manifest(m, dir / "m.jsonl");
    const LabelCounts c = read_manifest(dir / "m.jsonl").counts();
    EXPECT_EQ(c.cover, 2500u);
    EXPECT_EQ(c.stego, 2500u);
    EXPECT_TRUE(c.balanced());
}

TEST(FeatureStore, ZeroRecordLine) {
    std::ostringstream out;
    write_features({{"x.png", Label::cover, {}}}, out);
    EXPECT_EQ(out.str(), "path,label,mu1,mu2,sigma1,sigma2,gamma1,gamma2,kappa1,kappa2\nx.png,0,0,0,0,0,0,0,0,0\n");
}

TEST(FeatureStore, RandomRoundTripIsExact) {
    Rng rng(5);
    std::vector<FeatureRecord> recs;
    for (int i = 0; i < 200; ++i) {
        FeatureRecord r{"dir/img \"" + std::to_string(i) + "\",x.png", i % 2 ? Label::stego : Label::cover, {}};
        for (double& v : r.features) v = std::ldexp(rng.uniform(-1, 1), static_cast<int>(rng.below(80)) - 40);
        recs.push_back(r);
    }
    recs[0].features[3] = std::numeric_limits<double>::denorm_min();
    recs[1].features[5] = -0.0;
    std::stringstream buf;
    write_features(recs, buf);
    const auto back = read_features(buf);
    ASSERT_EQ(back.size(), recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        EXPECT_EQ(back[i].path, recs[i].path);
        EXPECT_EQ(back[i].label, recs[i].label);
        for (std::size_t k = 0; k < kFeatureDim; ++k)
            EXPECT_EQ(std::bit_cast<std::uint64_t>(back[i].features[k]), std::bit_cast<std::uint64_t>(recs[i].features[k]));
    }
}

TEST(FeatureStore, Errors) {
    std::istringstream missing("path,label,mu1,mu2,sigma1,sigma2,gamma1,gamma2,kappa1\nx,0,0,0,0,0,0,0,0\n");
    try {
        read_features(missing);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("kappa2"), std::string::npos);
    }
    std::ostringstream out;
    FeatureRecord bad{"x", Label::cover, {}};
    bad.features[2] = std::numeric_limits<double>::infinity();
    EXPECT_THROW(write_features({bad}, out), DataError);
    std::istringstream nan_row("path,label,mu1,mu2,sigma1,sigma2,gamma1,gamma2,kappa1,kappa2\nx,0,nan,0,0,0,0,0,0,0\n");
    EXPECT_THROW(read_features(nan_row), DataError);
    std::istringstream bad_label("path,label,mu1,mu2,sigma1,sigma2,gamma1,gamma2,kappa1,kappa2\nx,2,0,0,0,0,0,0,0,0\n");
    EXPECT_THROW(read_features(bad_label), DataError);
}

namespace {

SVMModel small_model() {
    Eigen::MatrixXd x(6, kFeatureDim);
    Rng rng(8);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index k = 0; k < x.cols(); ++k) x(i, k) = rng.normal() + (i < 3 ? -2.0 : 2.0);
    const std::vector<int> y = {-1, -1, -1, 1, 1, 1};
    return train_classifier(x, y, {}).model;
}

} // namespace

TEST(ModelStore, RoundTripDecisionValues) {
    const SVMModel m = small_model();
    const auto dir = test::scratch_dir("model_rt");
    save_model(m, dir / "m.svm");
    const SVMModel back = load_model(dir / "m.svm");
    Rng rng(9);
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
        Eigen::VectorXd v(kFeatureDim);
        for (auto& e : v) e = rng.normal() * 3;
        worst = std::max(worst, std::abs(m.decision(v) - back.decision(v)));
    }
    EXPECT_LE(worst, 1e-12);
}

TEST(ModelStore, Errors) {
    const SVMModel m = small_model();
    std::ostringstream out;
    save_model(m, out);
    const std::string text = out.str();

    std::string other = text;
    other.replace(other.find("stegica-svm 1"), 13, "stegica-svm 7");
    std::istringstream v(other);
    try {
        load_model(v);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
    }
    std::istringstream trunc(text.substr(0, text.size() / 2));
    EXPECT_THROW(load_model(trunc), DataError);

    SVMModel empty = m;
    empty.support_vectors.resize(0, kFeatureDim);
    empty.dual_coefs.resize(0);
    std::ostringstream sink;
    EXPECT_THROW(save_model(empty, sink), DataError);
}
