#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "dsu/core_model.hpp"
#include "dsu/discretize.hpp"
#include "dsu/error.hpp"
#include "dsu/harness/formats.hpp"
#include "dsu/harness/validate.hpp"
#include "dsu/harness/wav.hpp"
#include "dsu/ranking.hpp"
#include "dsu/signal_metrics.hpp"
#include "dsu/text_metrics.hpp"

namespace py = pybind11;
using namespace dsu;

namespace {

using Array2 = py::array_t<double, py::array::c_style | py::array::forcecast>;

FeatureMatrix to_features(const Array2& a, double hop) {
  if (a.ndim() != 2) throw Error(ErrorCode::kShape, "features must be a 2-D array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  std::vector<double> v(a.data(), a.data() + rows * cols);
  return FeatureMatrix(rows, cols, std::move(v), hop);
}

py::array_t<double> to_array(std::span<const double> values, std::size_t rows, std::size_t cols) {
  py::array_t<double> out({rows, cols});
  std::copy(values.begin(), values.end(), out.mutable_data());
  return out;
}

AudioBuffer to_audio(const py::array_t<double, py::array::c_style | py::array::forcecast>& samples, int rate) {
  if (samples.ndim() != 1) throw Error(ErrorCode::kShape, "samples must be a 1-D array");
  AudioBuffer a;
  a.samples.assign(samples.data(), samples.data() + samples.size());
  a.sample_rate_hz = rate;
  return a;
}

PyObject* g_error_type = nullptr;

}  // namespace

PYBIND11_MODULE(_dsu, m) {
  m.doc() = "Discrete speech unit tokenization, metrics and leaderboards";

  g_error_type = PyErr_NewException("dsu.DsuError", PyExc_ValueError, nullptr);
  m.add_object("DsuError", py::handle(g_error_type));
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(g_error_type)(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(g_error_type, exc.ptr());
    }
  });

  // -- core model ----------------------------------------------------------
  py::class_<UnitStream>(m, "UnitStream")
      .def(py::init([](std::vector<Token> tokens, std::uint32_t vocab_size) {
             UnitStream s{std::move(tokens), vocab_size};
             s.validate();
             return s;
           }),
           py::arg("tokens"), py::arg("vocab_size"))
      .def_readonly("tokens", &UnitStream::tokens)
      .def_readonly("vocab_size", &UnitStream::vocab_size)
      .def("__len__", &UnitStream::size)
      .def("__eq__", [](const UnitStream& a, const UnitStream& b) { return a == b; })
      .def("__repr__", [](const UnitStream& s) {
        return "UnitStream(len=" + std::to_string(s.size()) + ", vocab_size=" + std::to_string(s.vocab_size) + ")";
      });

  py::class_<DiscreteRepresentation>(m, "DiscreteRepresentation")
      .def(py::init([](std::vector<UnitStream> streams, double duration) {
             return DiscreteRepresentation{std::move(streams), duration};
           }),
           py::arg("streams"), py::arg("duration_seconds"))
      .def_readonly("streams", &DiscreteRepresentation::streams)
      .def_readonly("duration_seconds", &DiscreteRepresentation::duration_seconds);

  m.def("bitrate", &bitrate, py::arg("rep"));
  m.def("corpus_bitrate", [](const std::vector<DiscreteRepresentation>& reps) { return corpus_bitrate(reps); },
        py::arg("reps"));

  // -- discretize ----------------------------------------------------------
  py::class_<Codebook>(m, "Codebook")
      .def_property_readonly("k", &Codebook::k)
      .def_property_readonly("dim", &Codebook::dim)
      .def_property_readonly("centroids",
                             [](const Codebook& c) { return to_array(c.values(), c.k(), c.dim()); })
      .def("__eq__", [](const Codebook& a, const Codebook& b) { return a == b; });

  py::class_<KMeansResult>(m, "KMeansResult")
      .def_readonly("codebook", &KMeansResult::codebook)
      .def_readonly("inertia_history", &KMeansResult::inertia_history)
      .def_readonly("iterations", &KMeansResult::iterations)
      .def_readonly("converged", &KMeansResult::converged)
      .def_property_readonly("inertia", &KMeansResult::inertia);

  m.def(
      "kmeans_train",
      [](const Array2& features, std::size_t k, std::uint64_t seed, int max_iters, double rel_tol,
         double sample_fraction, int num_threads) {
        KMeansOptions o;
        o.k = k;
        o.seed = seed;
        o.max_iters = max_iters;
        o.rel_tol = rel_tol;
        o.sample_fraction = sample_fraction;
        o.num_threads = num_threads;
        const FeatureMatrix f = to_features(features, 0.02);
        py::gil_scoped_release release;
        return kmeans_train(f, o);
      },
      py::arg("features"), py::arg("k"), py::arg("seed") = 0, py::arg("max_iters") = 100,
      py::arg("rel_tol") = 1e-6, py::arg("sample_fraction") = 1.0, py::arg("num_threads") = 1);

  m.def(
      "quantize",
      [](const Array2& features, const Codebook& codebook, int num_threads) {
        return quantize(to_features(features, 0.02), codebook, num_threads);
      },
      py::arg("features"), py::arg("codebook"), py::arg("num_threads") = 1);

  m.def("dedup", &dedup, py::arg("stream"));

  py::class_<BpeModel>(m, "BpeModel")
      .def_property_readonly("base_vocab_size", &BpeModel::base_vocab_size)
      .def_property_readonly("total_vocab_size", &BpeModel::total_vocab_size)
      .def_property_readonly("merges",
                             [](const BpeModel& b) {
                               std::vector<std::tuple<Token, Token, Token>> out;
                               for (const auto& mg : b.merges()) out.emplace_back(mg.left, mg.right, mg.result);
                               return out;
                             })
      .def("expansion", &BpeModel::expansion, py::arg("symbol"))
      .def("__eq__", [](const BpeModel& a, const BpeModel& b) { return a == b; });

  m.def("bpe_train", [](const std::vector<UnitStream>& corpus, std::uint32_t target) {
    return bpe_train(corpus, target);
  }, py::arg("corpus"), py::arg("target_vocab"));
  m.def("bpe_encode", &bpe_encode, py::arg("stream"), py::arg("model"));
  m.def("bpe_decode", &bpe_decode, py::arg("stream"), py::arg("model"));

  py::class_<F0Contour>(m, "F0Contour")
      .def(py::init([](const std::vector<double>& f0_hz, const std::vector<bool>& voiced, double hop) {
             if (f0_hz.size() != voiced.size()) throw Error(ErrorCode::kShape, "f0_hz and voiced differ in length");
             F0Contour c;
             c.frame_hop_seconds = hop;
             for (std::size_t i = 0; i < f0_hz.size(); ++i) c.frames.push_back({f0_hz[i], static_cast<bool>(voiced[i])});
             return c;
           }),
           py::arg("f0_hz"), py::arg("voiced"), py::arg("frame_hop_seconds") = 0.01)
      .def_property_readonly("f0_hz",
                             [](const F0Contour& c) {
                               std::vector<double> v;
                               for (const auto& f : c.frames) v.push_back(f.f0_hz);
                               return v;
                             })
      .def_property_readonly("voiced",
                             [](const F0Contour& c) {
                               std::vector<bool> v;
                               for (const auto& f : c.frames) v.push_back(f.voiced);
                               return v;
                             })
      .def_readonly("frame_hop_seconds", &F0Contour::frame_hop_seconds)
      .def("voiced_count", &F0Contour::voiced_count)
      .def("__len__", &F0Contour::size);

  m.def("f0_vocab_size", &f0_vocab_size, py::arg("f0_max_hz"), py::arg("resolution_hz") = 10.0);
  m.def("quantize_f0", &quantize_f0, py::arg("contour"), py::arg("resolution_hz") = 10.0);

  // -- text metrics --------------------------------------------------------
  m.def("normalize_text", &normalize_text, py::arg("text"));
  m.def("edit_distance", [](const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
    return edit_distance(a, b);
  });
  m.def("edit_distance", [](const std::u32string& a, const std::u32string& b) {
    return edit_distance(std::span<const char32_t>(a), std::span<const char32_t>(b));
  });
  auto to_pairs = [](const std::vector<std::tuple<std::string, std::string>>& rows) {
    std::vector<TranscriptPair> pairs;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      pairs.push_back({std::to_string(i), std::get<0>(rows[i]), std::get<1>(rows[i])});
    }
    return pairs;
  };
  m.def(
      "cer",
      [=](const std::vector<std::tuple<std::string, std::string>>& rows, bool count_spaces) {
        TextOptions o;
        o.count_spaces = count_spaces;
        return cer_corpus(to_pairs(rows), o);
      },
      py::arg("pairs"), py::arg("count_spaces") = true);
  m.def(
      "wer", [=](const std::vector<std::tuple<std::string, std::string>>& rows) { return wer_corpus(to_pairs(rows)); },
      py::arg("pairs"));

  // -- signal metrics ------------------------------------------------------
  py::class_<CepstrumMatrix>(m, "CepstrumMatrix")
      .def(py::init([](const Array2& values, int rate) {
             if (values.ndim() != 2) throw Error(ErrorCode::kShape, "cepstra must be a 2-D array");
             const auto rows = static_cast<std::size_t>(values.shape(0));
             const auto cols = static_cast<std::size_t>(values.shape(1));
             return CepstrumMatrix(rows, cols, std::vector<double>(values.data(), values.data() + rows * cols), rate);
           }),
           py::arg("values"), py::arg("sample_rate_hz") = 0)
      .def_property_readonly("values",
                             [](const CepstrumMatrix& c) { return to_array(c.values(), c.frames(), c.width()); })
      .def_property_readonly("frames", &CepstrumMatrix::frames)
      .def_property_readonly("num_coeffs", &CepstrumMatrix::num_coeffs);

  m.def(
      "mel_cepstrum",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& samples, int rate, double window,
         double hop, std::size_t num_mels, std::size_t num_coeffs) {
        MelCepstrumOptions o;
        o.framing.window_seconds = window;
        o.framing.hop_seconds = hop;
        o.num_mels = num_mels;
        o.num_coeffs = num_coeffs;
        return mel_cepstrum(to_audio(samples, rate), o);
      },
      py::arg("samples"), py::arg("sample_rate_hz"), py::arg("window_seconds") = 0.025,
      py::arg("hop_seconds") = 0.010, py::arg("num_mels") = 80, py::arg("num_coeffs") = 13);

  m.def(
      "dtw_align",
      [](const CepstrumMatrix& a, const CepstrumMatrix& b) {
        Alignment al = dtw_align(a, b);
        return py::make_tuple(al.path, al.cost);
      },
      py::arg("a"), py::arg("b"));
  m.def("mcd", &mcd, py::arg("ref"), py::arg("syn"));

  py::class_<F0RmseResult>(m, "F0RmseResult")
      .def_readonly("value", &F0RmseResult::value)
      .def_readonly("pairs", &F0RmseResult::pairs)
      .def_readonly("no_overlap", &F0RmseResult::no_overlap);

  m.def(
      "extract_f0",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& samples, int rate, double f0_min,
         double f0_max, double hop) {
        PitchOptions o;
        o.f0_min_hz = f0_min;
        o.f0_max_hz = f0_max;
        o.hop_seconds = hop;
        return extract_f0(to_audio(samples, rate), o);
      },
      py::arg("samples"), py::arg("sample_rate_hz"), py::arg("f0_min_hz") = 40.0, py::arg("f0_max_hz") = 800.0,
      py::arg("hop_seconds") = 0.010);

  m.def(
      "f0_rmse",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& ref,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& syn, int rate) {
        return f0_rmse(to_audio(ref, rate), to_audio(syn, rate));
      },
      py::arg("ref"), py::arg("syn"), py::arg("sample_rate_hz"));

  m.def(
      "read_wav",
      [](const std::filesystem::path& path) {
        const AudioBuffer a = io::read_wav(path);
        py::array_t<double> samples(static_cast<py::ssize_t>(a.samples.size()));
        std::copy(a.samples.begin(), a.samples.end(), samples.mutable_data());
        return py::make_tuple(samples, a.sample_rate_hz);
      },
      py::arg("path"));
  m.def(
      "write_wav",
      [](const std::filesystem::path& path,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& samples,
         int rate) { io::write_wav(path, to_audio(samples, rate)); },
      py::arg("path"), py::arg("samples"), py::arg("sample_rate_hz"));

  // -- ranking -------------------------------------------------------------
  py::class_<ScoreCard>(m, "ScoreCard")
      .def(py::init([](std::string team_id, const std::string& track, std::map<std::string, double> metrics,
                       std::optional<int> rate) {
             return ScoreCard{std::move(team_id), parse_track(track), std::move(metrics), rate};
           }),
           py::arg("team_id"), py::arg("track"), py::arg("metrics"), py::arg("sampling_rate_hz") = py::none())
      .def_readonly("team_id", &ScoreCard::team_id)
      .def_readonly("metrics", &ScoreCard::metrics)
      .def_readonly("sampling_rate_hz", &ScoreCard::sampling_rate_hz);

  py::class_<LeaderboardEntry>(m, "LeaderboardEntry")
      .def_readonly("team_id", &LeaderboardEntry::team_id)
      .def_readonly("position", &LeaderboardEntry::position)
      .def_readonly("metrics", &LeaderboardEntry::metrics)
      .def_readonly("ranks", &LeaderboardEntry::ranks)
      .def_readonly("average_rank", &LeaderboardEntry::average_rank)
      .def_readonly("unresolved_tie", &LeaderboardEntry::unresolved_tie)
      .def_readonly("tiebreak_trace", &LeaderboardEntry::tiebreak_trace)
      .def_readonly("sampling_rate_hz", &LeaderboardEntry::sampling_rate_hz);

  py::class_<Leaderboard>(m, "Leaderboard")
      .def_property_readonly("track", [](const Leaderboard& l) { return std::string(to_string(l.track)); })
      .def_readonly("group", &Leaderboard::group)
      .def_readonly("tiebreak_order", &Leaderboard::tiebreak_order)
      .def_readonly("entries", &Leaderboard::entries)
      .def("order", [](const Leaderboard& l) {
        std::vector<std::string> ids;
        for (const auto& e : l.entries) ids.push_back(e.team_id);
        return ids;
      });

  auto parse_tie_mode = [](const std::string& name) {
    if (name == "fractional") return TieMode::kFractional;
    if (name == "competition") return TieMode::kCompetition;
    throw Error(ErrorCode::kConfig, "tie_mode must be 'fractional' or 'competition', got '" + name + "'");
  };
  m.def(
      "rank_metric",
      [=](const std::vector<double>& values, const std::string& direction, const std::string& tie_mode) {
        if (direction != "ascending" && direction != "descending") {
          throw Error(ErrorCode::kConfig, "direction must be 'ascending' or 'descending'");
        }
        return rank_metric(values, direction == "ascending" ? Direction::kAscending : Direction::kDescending,
                           parse_tie_mode(tie_mode));
      },
      py::arg("values"), py::arg("direction"), py::arg("tie_mode") = "fractional");

  m.def(
      "rank_track",
      [=](const std::string& track, const std::vector<ScoreCard>& cards, const std::string& tie_mode,
          int boundary_hz, const std::string& split) {
        RankOptions o;
        o.tie_mode = parse_tie_mode(tie_mode);
        o.high_rate_boundary_hz = boundary_hz;
        if (split == "auto") {
          o.tts_full_split = RateSplit::kAuto;
        } else if (split == "never") {
          o.tts_full_split = RateSplit::kNever;
        } else if (split == "always") {
          o.tts_full_split = RateSplit::kAlways;
        } else {
          throw Error(ErrorCode::kConfig, "split must be 'auto', 'never' or 'always', got '" + split + "'");
        }
        return rank_track(parse_track(track), cards, o);
      },
      py::arg("track"), py::arg("cards"), py::arg("tie_mode") = "fractional", py::arg("boundary_hz") = 48000,
      py::arg("split") = "auto");

  m.def(
      "read_scores",
      [](const std::filesystem::path& path, const std::string& track) { return io::read_scores(path, parse_track(track)); },
      py::arg("path"), py::arg("track"));

  m.def(
      "validate_submission",
      [](const std::filesystem::path& dir) {
        const io::ValidationReport r = io::validate_submission(dir);
        return py::module_::import("json").attr("loads")(r.to_json(-1));
      },
      py::arg("directory"));
}
