#include "pmivec/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "pmivec/common.hpp"
#include "pmivec/cooccurrence.hpp"
#include "pmivec/corpus.hpp"
#include "pmivec/evaluation.hpp"
#include "pmivec/factorizer.hpp"
#include "pmivec/pmi.hpp"
#include "pmivec/storage.hpp"

namespace pmivec {

namespace fs = std::filesystem;

namespace {

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Usage: return 2;
        case ErrorKind::Io: return 3;
        case ErrorKind::Parse: return 4;
        case ErrorKind::Domain: return 5;
        case ErrorKind::Train: return 6;
    }
    return 1;
}

// Input paths fall back to $PMIVEC_DATA_DIR when not found as given.
fs::path resolve_input(const std::string& path) {
    if (fs::exists(path)) return path;
    if (const char* dir = std::getenv("PMIVEC_DATA_DIR")) {
        fs::path alt = fs::path(dir) / path;
        if (fs::exists(alt)) return alt;
    }
    return path;
}

std::ifstream open_corpus(const std::string& path) {
    fs::path p = resolve_input(path);
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open corpus: " + p.string());
    return in;
}

struct Reporter {
    std::string path;
    std::vector<std::string> lines;

    void add(const std::string& line) {
        lines.push_back(line);
        std::cout << line << "\n";
    }
    void flush() {
        if (path.empty()) return;
        std::ofstream out(path);
        if (!out) throw Error(ErrorKind::Io, "cannot write report: " + path);
        for (const auto& l : lines) out << l << "\n";
    }
};

struct TrainFlags {
    std::string corpus, vocab, cooc, variant = "ppmi", out, save_context, report;
    TrainConfig cfg;
    double subsample = 1e-5;
    std::uint32_t window = 0;  // 0 = take from cooc file
    bool deterministic = false;
};

std::string format_config(const TrainConfig& cfg) {
    std::ostringstream os;
    os << "variant=" << cfg.variant.to_string() << " window=" << cfg.window << " dim=" << cfg.dim
       << " negatives=" << cfg.negatives << " lr=" << cfg.lr << " epochs=" << cfg.epochs
       << " subsample=" << (cfg.subsample_enabled ? cfg.subsample_t : 0.0)
       << " alpha=" << cfg.alpha << " neg_power=" << cfg.neg_power << " seed=" << cfg.seed
       << " threads=" << cfg.threads;
    return os.str();
}

int cmd_vocab(const std::string& corpus, const std::string& out, std::uint64_t min_count,
              Reporter& rep) {
    std::ifstream in = open_corpus(corpus);
    Vocabulary vocab = build_vocab(in, min_count);
    save_vocabulary(vocab, out);
    std::ostringstream os;
    os << "vocab words=" << vocab.size() << " total_tokens=" << vocab.total_tokens
       << " raw_tokens=" << vocab.raw_tokens << " min_count=" << min_count;
    rep.add(os.str());
    rep.flush();
    return 0;
}

int cmd_cooc(const std::string& corpus, const std::string& vocab_path, const std::string& out,
             std::uint32_t window, bool positional, double subsample_t, std::uint64_t seed,
             unsigned threads, Reporter& rep) {
    Vocabulary vocab = load_vocabulary(resolve_input(vocab_path));
    std::ifstream in = open_corpus(corpus);
    std::vector<WordId> ids = encode(in, vocab);
    SubsampleParams sub{subsample_t, subsample_t > 0.0, seed};
    CoocMatrix m = count_cooccurrences(ids, vocab, window, positional, sub, threads);
    save_cooc(m, out);
    std::ostringstream os;
    os << "cooc cells=" << m.nnz() << " grand_total=" << m.grand_total << " window=" << m.window
       << " positional=" << (m.positional ? 1 : 0) << " ctx_size=" << m.ctx_size;
    rep.add(os.str());
    rep.flush();
    return 0;
}

int cmd_train(TrainFlags& f, Reporter& rep) {
    Vocabulary vocab = load_vocabulary(resolve_input(f.vocab));
    CoocMatrix m = load_cooc(resolve_input(f.cooc));
    if (m.vocab_size != vocab.size())
        throw Error(ErrorKind::Usage, "cooccurrence file vocabulary size does not match vocab file");
    if (f.window != 0 && f.window != m.window)
        throw Error(ErrorKind::Usage, "--window conflicts with the cooccurrence file's window");

    TrainConfig cfg = f.cfg;
    cfg.window = m.window;
    cfg.subsample_t = f.subsample;
    cfg.subsample_enabled = f.subsample > 0.0;
    cfg.variant = PmiVariantSpec::parse(f.variant, cfg.alpha);
    if (f.deterministic) cfg.threads = 1;
    cfg.validate();

    std::cout << "config cmd=train corpus=" << f.corpus << " " << format_config(cfg)
              << " deterministic=" << (f.deterministic ? 1 : 0) << "\n";

    std::ifstream in = open_corpus(f.corpus);
    std::vector<WordId> ids = encode(in, vocab);

    TrainReport report;
    Embeddings emb = train(ids, vocab, m, cfg, &report);
    save_embeddings(emb, vocab, f.out);
    if (!f.save_context.empty()) save_context_embeddings(emb, vocab, m, f.save_context);

    std::ostringstream os;
    write_report(report, os);
    std::istringstream lines(os.str());
    for (std::string line; std::getline(lines, line);) rep.add(line);
    rep.flush();
    return 0;
}

int cmd_eval_ws(const std::string& vectors, const std::string& dataset, Reporter& rep) {
    WordVectors wv = load_embeddings(resolve_input(vectors));
    auto data = load_word_pairs(resolve_input(dataset));
    SimilarityResult r = eval_word_similarity(wv, data);
    std::ostringstream os;
    os << "word-similarity spearman=" << r.score << " coverage=" << r.coverage
       << " covered=" << r.covered << " excluded=" << r.excluded;
    rep.add(os.str());
    rep.flush();
    return 0;
}

int cmd_eval_analogy(const std::string& vectors, const std::string& dataset, unsigned threads,
                     Reporter& rep) {
    WordVectors wv = load_embeddings(resolve_input(vectors));
    auto data = load_analogies(resolve_input(dataset));
    AnalogyResult r = eval_analogies(wv, data, threads);
    std::ostringstream os;
    os << "analogy accuracy=" << r.accuracy << " answerable=" << r.answerable
       << " unanswerable=" << r.unanswerable;
    rep.add(os.str());
    for (const auto& [cat, stats] : r.per_category) {
        std::ostringstream cs;
        cs << "analogy-category name=" << cat << " correct=" << stats.correct
           << " answered=" << stats.answered;
        rep.add(cs.str());
    }
    rep.flush();
    return 0;
}

int cmd_eval_sts(const std::string& vectors, const std::string& dataset, const StsColumns& cols,
                 Reporter& rep) {
    WordVectors wv = load_embeddings(resolve_input(vectors));
    auto data = load_sts(resolve_input(dataset), cols);
    SimilarityResult r = eval_sts(wv, data);
    std::ostringstream os;
    os << "sts pearson=" << r.score << " coverage=" << r.coverage << " covered=" << r.covered
       << " excluded=" << r.excluded;
    rep.add(os.str());
    rep.flush();
    return 0;
}

int cmd_histogram(const std::string& corpus, const std::string& vocab_path,
                  const std::string& cooc_path, std::uint64_t n, double z, double width,
                  const std::string& out, TrainConfig cfg, double subsample_t, Reporter& rep) {
    Vocabulary vocab = load_vocabulary(resolve_input(vocab_path));
    CoocMatrix m = load_cooc(resolve_input(cooc_path));
    if (m.vocab_size != vocab.size())
        throw Error(ErrorKind::Usage, "cooccurrence file vocabulary size does not match vocab file");
    cfg.window = m.window;
    cfg.subsample_t = subsample_t;
    cfg.subsample_enabled = subsample_t > 0.0;

    std::ifstream in = open_corpus(corpus);
    std::vector<WordId> ids = encode(in, vocab);
    SpectrumSample sample = sample_spectrum(ids, vocab, m, cfg, n, z);

    std::vector<double> values;
    values.reserve(sample.pairs.size());
    for (const auto& p : sample.pairs) values.push_back(p.target);
    double max_v = *std::max_element(values.begin(), values.end());
    Histogram h = histogram(values, HistogramSpec{width, z, max_v});
    SpectrumIntervals iv = spectrum_intervals(values, z);

    std::ostringstream csv;
    for (std::size_t i = 0; i < h.counts.size(); ++i)
        csv << h.bucket_start(i) << "," << h.bucket_start(i + 1) << "," << h.counts[i] << "\n";
    std::ostringstream summary;
    summary << "# intervals [" << z << "," << z << "]=" << iv.at_floor << " (" << z
            << ",0]=" << iv.negative << " [-2,0]=" << iv.minus2_to_zero
            << " (0,inf)=" << iv.positive << " wrapped=" << (sample.wrapped ? 1 : 0);
    csv << summary.str() << "\n";

    if (out.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream os(out);
        if (!os) throw Error(ErrorKind::Io, "cannot write histogram: " + out);
        os << csv.str();
        std::cout << summary.str() << "\n";
    }
    rep.lines.push_back(summary.str());
    rep.flush();
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"corpus-to-embeddings pipeline: PMI-variant matrix factorization"};
    app.require_subcommand(1);

    // ---- vocab ----
    auto* vocab_cmd = app.add_subcommand("vocab", "build a vocabulary from a text corpus");
    std::string v_corpus, v_out;
    std::uint64_t v_min_count = 5;
    std::string v_report;
    vocab_cmd->add_option("--corpus", v_corpus, "input text file")->required();
    vocab_cmd->add_option("--out", v_out, "output vocabulary file")->required();
    vocab_cmd->add_option("--min-count", v_min_count, "discard words with frequency below this")
        ->capture_default_str();
    vocab_cmd->add_option("--report", v_report, "also write the summary to this file");

    // ---- cooc ----
    auto* cooc_cmd = app.add_subcommand("cooc", "count windowed cooccurrences");
    std::string c_corpus, c_vocab, c_out, c_report;
    std::uint32_t c_window = 2;
    bool c_no_positional = false;
    double c_subsample = 1e-5;
    std::uint64_t c_seed = 1;
    unsigned c_threads = 1;
    cooc_cmd->add_option("--corpus", c_corpus, "input text file")->required();
    cooc_cmd->add_option("--vocab", c_vocab, "vocabulary file")->required();
    cooc_cmd->add_option("--out", c_out, "output cooccurrence file")->required();
    cooc_cmd->add_option("--window", c_window, "symmetric window size (paper default 2)")
        ->capture_default_str();
    cooc_cmd->add_flag("--no-positional", c_no_positional,
                       "plain word contexts instead of positional contexts");
    cooc_cmd->add_option("--subsample", c_subsample, "subsampling threshold t, 0 disables")
        ->capture_default_str();
    cooc_cmd->add_option("--seed", c_seed, "rng seed")->capture_default_str();
    cooc_cmd->add_option("--threads", c_threads, "worker threads")->capture_default_str();
    cooc_cmd->add_option("--report", c_report, "also write the summary to this file");

    // ---- train ----
    auto* train_cmd = app.add_subcommand("train", "factorize a PMI variant into embeddings");
    TrainFlags t;
    train_cmd->add_option("--corpus", t.corpus, "input text file")->required();
    train_cmd->add_option("--vocab", t.vocab, "vocabulary file")->required();
    train_cmd->add_option("--cooc", t.cooc, "cooccurrence file")->required();
    train_cmd->add_option("--out", t.out, "output word vectors file")->required();
    train_cmd
        ->add_option("--variant", t.variant,
                     "pmi variant grammar: ppmi | cpmi:Z | npmi | nnegpmi | lpmi:B, with "
                     "optional filter +pos | +neg (e.g. ppmi+pos, cpmi:-2+neg)")
        ->capture_default_str();
    train_cmd->add_option("--save-context", t.save_context, "also save context vectors here");
    train_cmd->add_option("--window", t.window, "must match the cooc file (checked)");
    train_cmd->add_option("--dim", t.cfg.dim, "embedding dimension (paper default 300)")
        ->capture_default_str();
    train_cmd->add_option("--negatives", t.cfg.negatives, "negative samples per center word (paper default 5)")
        ->capture_default_str();
    train_cmd->add_option("--lr", t.cfg.lr, "initial learning rate (paper default .025)")
        ->capture_default_str();
    train_cmd->add_option("--epochs", t.cfg.epochs, "training passes")->capture_default_str();
    train_cmd->add_option("--subsample", t.subsample, "subsampling threshold t, 0 disables")
        ->capture_default_str();
    train_cmd->add_option("--alpha", t.cfg.alpha, "context distribution smoothing (paper default .75)")
        ->capture_default_str();
    train_cmd->add_option("--neg-power", t.cfg.neg_power, "negative distribution power (paper default .75)")
        ->capture_default_str();
    train_cmd->add_option("--seed", t.cfg.seed, "rng seed")->capture_default_str();
    train_cmd->add_option("--threads", t.cfg.threads, "lock-free worker threads")
        ->capture_default_str();
    train_cmd->add_flag("--deterministic", t.deterministic,
                        "single-threaded bit-reproducible run");
    train_cmd->add_option("--report", t.report, "write the training report to this file");

    // ---- eval-ws ----
    auto* ws_cmd = app.add_subcommand("eval-ws", "word similarity (Spearman vs gold)");
    std::string w_vectors, w_dataset, w_report;
    ws_cmd->add_option("--vectors", w_vectors, "word vectors file")->required();
    ws_cmd->add_option("--dataset", w_dataset, "word1<TAB>word2<TAB>score lines")->required();
    ws_cmd->add_option("--report", w_report, "also write results to this file");

    // ---- eval-analogy ----
    auto* an_cmd = app.add_subcommand("eval-analogy", "analogy accuracy (3CosAdd)");
    std::string a_vectors, a_dataset, a_report;
    unsigned a_threads = 1;
    an_cmd->add_option("--vectors", a_vectors, "word vectors file")->required();
    an_cmd->add_option("--dataset", a_dataset, "Google analogy format")->required();
    an_cmd->add_option("--threads", a_threads, "worker threads")->capture_default_str();
    an_cmd->add_option("--report", a_report, "also write results to this file");

    // ---- eval-sts ----
    auto* sts_cmd = app.add_subcommand("eval-sts", "sentence similarity (bag of vectors, Pearson)");
    std::string s_vectors, s_dataset, s_report;
    StsColumns s_cols;
    sts_cmd->add_option("--vectors", s_vectors, "word vectors file")->required();
    sts_cmd->add_option("--dataset", s_dataset, "tab-separated gold/sentence columns")->required();
    sts_cmd->add_option("--gold-col", s_cols.gold, "gold score column index")->capture_default_str();
    sts_cmd->add_option("--s1-col", s_cols.s1, "first sentence column index")->capture_default_str();
    sts_cmd->add_option("--s2-col", s_cols.s2, "second sentence column index")->capture_default_str();
    sts_cmd->add_option("--report", s_report, "also write results to this file");

    // ---- histogram ----
    auto* hist_cmd = app.add_subcommand("histogram", "CPMI_z spectrum of sampled training pairs");
    std::string h_corpus, h_vocab, h_cooc, h_out, h_report;
    std::uint64_t h_n = 100000;
    double h_z = -5.0, h_width = 0.2, h_subsample = 1e-5;
    TrainConfig h_cfg;
    hist_cmd->add_option("--corpus", h_corpus, "input text file")->required();
    hist_cmd->add_option("--vocab", h_vocab, "vocabulary file")->required();
    hist_cmd->add_option("--cooc", h_cooc, "cooccurrence file")->required();
    hist_cmd->add_option("--n", h_n, "number of sampled pairs")->capture_default_str();
    hist_cmd->add_option("--z", h_z, "CPMI floor")->capture_default_str();
    hist_cmd->add_option("--bucket-width", h_width, "histogram bucket width")->capture_default_str();
    hist_cmd->add_option("--negatives", h_cfg.negatives, "negative samples per center word")
        ->capture_default_str();
    hist_cmd->add_option("--subsample", h_subsample, "subsampling threshold t, 0 disables")
        ->capture_default_str();
    hist_cmd->add_option("--alpha", h_cfg.alpha, "context distribution smoothing")
        ->capture_default_str();
    hist_cmd->add_option("--neg-power", h_cfg.neg_power, "negative distribution power")
        ->capture_default_str();
    hist_cmd->add_option("--seed", h_cfg.seed, "rng seed")->capture_default_str();
    hist_cmd->add_option("--out", h_out, "CSV output path (default: stdout)");
    hist_cmd->add_option("--report", h_report, "also write the summary to this file");

    std::vector<const char*> argv;
    argv.push_back("pmivec");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(vocab_cmd)) {
            Reporter rep{v_report, {}};
            std::cout << "config cmd=vocab corpus=" << v_corpus << " min_count=" << v_min_count
                      << "\n";
            return cmd_vocab(v_corpus, v_out, v_min_count, rep);
        }
        if (app.got_subcommand(cooc_cmd)) {
            Reporter rep{c_report, {}};
            std::cout << "config cmd=cooc corpus=" << c_corpus << " window=" << c_window
                      << " positional=" << (c_no_positional ? 0 : 1)
                      << " subsample=" << c_subsample << " seed=" << c_seed
                      << " threads=" << c_threads << "\n";
            return cmd_cooc(c_corpus, c_vocab, c_out, c_window, !c_no_positional, c_subsample,
                            c_seed, c_threads, rep);
        }
        if (app.got_subcommand(train_cmd)) {
            Reporter rep{t.report, {}};
            return cmd_train(t, rep);
        }
        if (app.got_subcommand(ws_cmd)) {
            Reporter rep{w_report, {}};
            std::cout << "config cmd=eval-ws vectors=" << w_vectors << " dataset=" << w_dataset
                      << "\n";
            return cmd_eval_ws(w_vectors, w_dataset, rep);
        }
        if (app.got_subcommand(an_cmd)) {
            Reporter rep{a_report, {}};
            std::cout << "config cmd=eval-analogy vectors=" << a_vectors
                      << " dataset=" << a_dataset << " threads=" << a_threads << "\n";
            return cmd_eval_analogy(a_vectors, a_dataset, a_threads, rep);
        }
        if (app.got_subcommand(sts_cmd)) {
            Reporter rep{s_report, {}};
            std::cout << "config cmd=eval-sts vectors=" << s_vectors << " dataset=" << s_dataset
                      << " cols=" << s_cols.gold << "," << s_cols.s1 << "," << s_cols.s2 << "\n";
            return cmd_eval_sts(s_vectors, s_dataset, s_cols, rep);
        }
        if (app.got_subcommand(hist_cmd)) {
            Reporter rep{h_report, {}};
            std::cout << "config cmd=histogram n=" << h_n << " z=" << h_z
                      << " bucket_width=" << h_width << " negatives=" << h_cfg.negatives
                      << " subsample=" << h_subsample << " alpha=" << h_cfg.alpha
                      << " neg_power=" << h_cfg.neg_power << " seed=" << h_cfg.seed << "\n";
            return cmd_histogram(h_corpus, h_vocab, h_cooc, h_n, h_z, h_width, h_out, h_cfg,
                                 h_subsample, rep);
        }
    } catch (const Error& e) {
        std::cerr << "error[" << error_category(e.kind()) << "]: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error[internal]: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace pmivec
