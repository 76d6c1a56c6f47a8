#include "cpctl/formula.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <sstream>

namespace cpctl {

namespace {

bool isStateKind(NodeKind k) {
    switch (k) {
        case NodeKind::True:
        case NodeKind::False:
        case NodeKind::Atom:
        case NodeKind::NegAtom:
        case NodeKind::And:
        case NodeKind::Or:
        case NodeKind::ProbGeq:
            return true;
        default:
            return false;
    }
}

}  // namespace

std::vector<double> Formula::thresholds() const {
    std::vector<double> out;
    out.reserve(pathSubs.size());
    for (int id : pathSubs) {
        // pathSubs stores the ProbGeq node owning each path formula.
        out.push_back(nodes[static_cast<size_t>(id)].p);
    }
    return out;
}

bool Formula::isBooleanOnly() const { return pathSubs.empty(); }

// ---------------------------------------------------------------------------
// Finalization: index tables + fragment validation.

Formula finalizeFormula(std::vector<FormulaNode> nodes, int root, Fragment fragment) {
    Formula f;
    f.nodes = std::move(nodes);
    f.root = root;
    f.fragment = fragment;
    for (auto& n : f.nodes) {
        n.sfIndex = -1;
        n.pathIndex = -1;
    }

    // Post-order walk: children first, so stateSubs/pathSubs respect the
    // bottom-up evaluation order and inner path formulas get lower indices.
    std::function<void(int)> visit = [&](int id) {
        FormulaNode& n = f.nodes[static_cast<size_t>(id)];
        if (n.kind == NodeKind::ProbGeq) {
            visit(n.path);
        } else {
            if (n.left >= 0) visit(n.left);
            if (n.right >= 0) visit(n.right);
        }
        if (isStateKind(n.kind)) {
            if (n.sfIndex < 0) {
                n.sfIndex = static_cast<int>(f.stateSubs.size());
                f.stateSubs.push_back(id);
            }
        } else {
            n.pathIndex = static_cast<int>(f.pathSubs.size());
        }
        if (n.kind == NodeKind::ProbGeq) {
            // The ProbGeq node and its path node share the path index.
            n.pathIndex = f.nodes[static_cast<size_t>(n.path)].pathIndex;
            f.pathSubs.push_back(id);
        }
    };
    visit(root);

    for (int id : f.stateSubs) {
        const FormulaNode& n = f.node(id);
        if (n.kind == NodeKind::ProbGeq && (n.p < 0.0 || n.p > 1.0))
            throw ParseError("probability threshold outside [0, 1]", 0);
        if (fragment == Fragment::Cpctl) {
            if (n.kind == NodeKind::Or)
                throw ParseError("disjunction is not part of CPCTL", 0);
            if (n.kind == NodeKind::ProbGeq) {
                NodeKind pk = f.node(n.path).kind;
                if (pk == NodeKind::Next)
                    throw ParseError("operator X is not part of CPCTL", 0);
                if (pk == NodeKind::WeakUntil)
                    throw ParseError("non-continuing W is not part of CPCTL", 0);
                if (pk == NodeKind::Until)
                    throw ParseError("operator U is not part of CPCTL", 0);
            }
        }
    }
    return f;
}

// ---------------------------------------------------------------------------
// Parser.

namespace {

struct Token {
    enum Type { Ident, True, False, ProbGeqOpen, Number, Amp, Bang, LPar, RPar, LBrk, RBrk, Slash, End } type;
    std::string text;
    double number = 0.0;
    size_t pos = 0;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : textPtr_(&text) { advance(); }

    const Token& peek() const { return tok_; }
    Token next() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        while (i_ < text().size() && std::isspace(static_cast<unsigned char>(text()[i_]))) ++i_;
        tok_.pos = i_;
        if (i_ >= text().size()) {
            tok_.type = Token::End;
            tok_.text.clear();
            return;
        }
        char c = text()[i_];
        if (c == '&') { tok_ = {Token::Amp, "&", 0, i_++}; return; }
        if (c == '!') { tok_ = {Token::Bang, "!", 0, i_++}; return; }
        if (c == '(') { tok_ = {Token::LPar, "(", 0, i_++}; return; }
        if (c == ')') { tok_ = {Token::RPar, ")", 0, i_++}; return; }
        if (c == '[') { tok_ = {Token::LBrk, "[", 0, i_++}; return; }
        if (c == ']') { tok_ = {Token::RBrk, "]", 0, i_++}; return; }
        if (c == '/') { tok_ = {Token::Slash, "/", 0, i_++}; return; }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            size_t start = i_;
            while (i_ < text().size() &&
                   (std::isdigit(static_cast<unsigned char>(text()[i_])) || text()[i_] == '.'))
                ++i_;
            tok_.type = Token::Number;
            tok_.text = text().substr(start, i_ - start);
            tok_.number = std::stod(tok_.text);
            tok_.pos = start;
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = i_;
            while (i_ < text().size() && (std::isalnum(static_cast<unsigned char>(text()[i_])) ||
                                         text()[i_] == '_'))
                ++i_;
            std::string word = text().substr(start, i_ - start);
            // "P>=" opens a probability operator; the comparison glyphs are
            // consumed here so atoms may still be named P.
            if (word == "P" && i_ + 1 < text().size() && text()[i_] == '>' && text()[i_ + 1] == '=') {
                i_ += 2;
                tok_ = {Token::ProbGeqOpen, "P>=", 0, start};
                return;
            }
            if (word == "true") { tok_ = {Token::True, word, 0, start}; return; }
            if (word == "false") { tok_ = {Token::False, word, 0, start}; return; }
            tok_ = {Token::Ident, word, 0, start};
            return;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", i_);
    }

    // Held by pointer so the parser can snapshot and restore lexer state
    // (needed to disambiguate G/X the operator from G/X the atom).
    const std::string& text() const { return *textPtr_; }
    const std::string* textPtr_;
    Token tok_;
    size_t i_ = 0;
};

class Parser {
public:
    Parser(const std::string& text, Fragment fragment, bool continuingNormalize)
        : lex_(text), fragment_(fragment), normalize_(continuingNormalize) {}

    Formula run() {
        int root = parseConj();
        if (lex_.peek().type != Token::End)
            throw ParseError("trailing input after formula", lex_.peek().pos);
        return finalizeFormula(std::move(nodes_), root, fragment_);
    }

private:
    int add(FormulaNode n) {
        nodes_.push_back(std::move(n));
        return static_cast<int>(nodes_.size() - 1);
    }

    bool startsUnit(const Token& t) const {
        switch (t.type) {
            case Token::Ident:
            case Token::True:
            case Token::False:
            case Token::Bang:
            case Token::LPar:
            case Token::ProbGeqOpen:
                return true;
            default:
                return false;
        }
    }

    int parseConj() {
        int left = parseUnit();
        while (lex_.peek().type == Token::Amp) {
            lex_.next();
            int right = parseUnit();
            FormulaNode n;
            n.kind = NodeKind::And;
            n.left = left;
            n.right = right;
            left = add(n);
        }
        return left;
    }

    int parseUnit() {
        Token t = lex_.peek();
        switch (t.type) {
            case Token::True:
                lex_.next();
                return add({NodeKind::True});
            case Token::False:
                lex_.next();
                return add({NodeKind::False});
            case Token::Bang: {
                lex_.next();
                Token id = lex_.next();
                if (id.type != Token::Ident)
                    throw ParseError("negation applies to atoms only", id.pos);
                FormulaNode n;
                n.kind = NodeKind::NegAtom;
                n.atom = id.text;
                return add(n);
            }
            case Token::Ident: {
                lex_.next();
                FormulaNode n;
                n.kind = NodeKind::Atom;
                n.atom = t.text;
                return add(n);
            }
            case Token::LPar: {
                lex_.next();
                int inner = parseConj();
                expect(Token::RPar, ")");
                return inner;
            }
            case Token::ProbGeqOpen: {
                lex_.next();
                double p = parseProb();
                expect(Token::LBrk, "[");
                int path = parsePath(t.pos);
                expect(Token::RBrk, "]");
                FormulaNode n;
                n.kind = NodeKind::ProbGeq;
                n.p = p;
                n.path = path;
                return add(n);
            }
            default:
                throw ParseError("expected a formula", t.pos);
        }
    }

    double parseProb() {
        Token t = lex_.next();
        if (t.type != Token::Number) throw ParseError("expected a probability", t.pos);
        if (lex_.peek().type == Token::Slash) {
            lex_.next();
            Token den = lex_.next();
            if (den.type != Token::Number || den.text.find('.') != std::string::npos ||
                t.text.find('.') != std::string::npos)
                throw ParseError("fractions must be INT/INT", den.pos);
            if (den.number == 0) throw ParseError("zero denominator", den.pos);
            return t.number / den.number;
        }
        return t.number;
    }

    int parsePath(size_t opPos) {
        Token t = lex_.peek();
        // G and X are only operators when what follows can start a formula;
        // otherwise they are plain atoms (the gridworld goal is the atom G).
        if (t.type == Token::Ident && (t.text == "G" || t.text == "X")) {
            Lexer save = lex_;
            lex_.next();
            if (startsUnit(lex_.peek())) {
                int sub = parseConj();
                if (t.text == "G") {
                    // G f  ==  f W bottom, kept in continuing form.
                    FormulaNode bot;
                    bot.kind = NodeKind::False;
                    int botId = add(bot);
                    FormulaNode n;
                    n.kind = NodeKind::ContinuingWeakUntil;
                    n.left = sub;
                    n.right = botId;
                    return add(n);
                }
                if (fragment_ == Fragment::Cpctl)
                    throw ParseError("operator X is not part of CPCTL", t.pos);
                FormulaNode n;
                n.kind = NodeKind::Next;
                n.left = sub;
                return add(n);
            }
            lex_ = save;  // it was an atom after all
        }
        int cond = parseConj();
        Token w = lex_.next();
        if (w.type != Token::Ident || w.text != "W")
            throw ParseError("expected W in path formula", w.pos);
        int goal = parseConj();
        if (fragment_ == Fragment::SafePctl) {
            FormulaNode n;
            n.kind = NodeKind::WeakUntil;
            n.left = cond;
            n.right = goal;
            return add(n);
        }
        // CPCTL: the goal must repeat the condition as a conjunct; strip that
        // copy and keep the rest as the continuing goal. Both sides are
        // flattened so a conjunction condition matches its spread-out copy.
        std::vector<int> units;
        flattenConj(goal, units);
        std::vector<int> condUnits;
        flattenConj(cond, condUnits);
        bool matchedAll = true;
        for (int cu : condUnits) {
            int found = -1;
            for (size_t i = 0; i < units.size(); ++i) {
                if (equalNodes(cu, units[i])) {
                    found = static_cast<int>(i);
                    break;
                }
            }
            if (found < 0) {
                matchedAll = false;
                break;
            }
            units.erase(units.begin() + found);
        }
        int rest;
        if (!matchedAll) {
            if (!normalize_)
                throw ParseError(
                    "W goal does not contain the condition as a conjunct "
                    "(use --continuing-normalize to rewrite it)",
                    opPos);
            rest = goal;
        } else {
            if (units.empty()) {
                FormulaNode top;
                top.kind = NodeKind::True;
                rest = add(top);
            } else {
                rest = units[0];
                for (size_t i = 1; i < units.size(); ++i) {
                    FormulaNode n;
                    n.kind = NodeKind::And;
                    n.left = rest;
                    n.right = units[i];
                    rest = add(n);
                }
            }
        }
        FormulaNode n;
        n.kind = NodeKind::ContinuingWeakUntil;
        n.left = cond;
        n.right = rest;
        return add(n);
    }

    void flattenConj(int id, std::vector<int>& out) const {
        const FormulaNode& n = nodes_[static_cast<size_t>(id)];
        if (n.kind == NodeKind::And) {
            flattenConj(n.left, out);
            flattenConj(n.right, out);
        } else {
            out.push_back(id);
        }
    }

    bool equalNodes(int a, int b) const {
        const FormulaNode& x = nodes_[static_cast<size_t>(a)];
        const FormulaNode& y = nodes_[static_cast<size_t>(b)];
        if (x.kind != y.kind || x.atom != y.atom || x.p != y.p) return false;
        if ((x.left >= 0) != (y.left >= 0) || (x.right >= 0) != (y.right >= 0)) return false;
        if (x.kind == NodeKind::ProbGeq) return equalNodes(x.path, y.path);
        if (x.left >= 0 && !equalNodes(x.left, y.left)) return false;
        if (x.right >= 0 && !equalNodes(x.right, y.right)) return false;
        return true;
    }

    void expect(Token::Type type, const char* what) {
        Token t = lex_.next();
        if (t.type != type)
            throw ParseError(std::string("expected '") + what + "'", t.pos);
    }

    Lexer lex_;
    Fragment fragment_;
    bool normalize_;
    std::vector<FormulaNode> nodes_;
};

}  // namespace

Formula parseFormula(const std::string& text, Fragment fragment, bool continuingNormalize) {
    return Parser(text, fragment, continuingNormalize).run();
}

// ---------------------------------------------------------------------------
// Printing.

namespace {

std::string formatProb(double p) {
    std::ostringstream os;
    os.precision(17);
    os << p;
    return os.str();
}

void printRec(const Formula& f, int id, std::ostream& os, bool parenthesizeConj);

void printPath(const Formula& f, const FormulaNode& n, std::ostream& os) {
    switch (n.kind) {
        case NodeKind::Next:
            os << "X ";
            printRec(f, n.left, os, true);
            break;
        case NodeKind::WeakUntil:
            printRec(f, n.left, os, true);
            os << " W ";
            printRec(f, n.right, os, true);
            break;
        case NodeKind::ContinuingWeakUntil:
            if (f.node(n.right).kind == NodeKind::False) {
                os << "G ";
                printRec(f, n.left, os, true);
            } else {
                printRec(f, n.left, os, true);
                os << " W (";
                printRec(f, n.left, os, true);
                os << " & ";
                printRec(f, n.right, os, true);
                os << ")";
            }
            break;
        case NodeKind::Until:
            printRec(f, n.left, os, true);
            os << " U ";
            printRec(f, n.right, os, true);
            break;
        default:
            throw std::logic_error("not a path node");
    }
}

void printRec(const Formula& f, int id, std::ostream& os, bool parenthesizeConj) {
    const FormulaNode& n = f.node(id);
    switch (n.kind) {
        case NodeKind::True: os << "true"; break;
        case NodeKind::False: os << "false"; break;
        case NodeKind::Atom: os << n.atom; break;
        case NodeKind::NegAtom: os << "!" << n.atom; break;
        case NodeKind::And:
            if (parenthesizeConj) os << "(";
            printRec(f, n.left, os, false);
            os << " & ";
            printRec(f, n.right, os, true);
            if (parenthesizeConj) os << ")";
            break;
        case NodeKind::Or:
            os << "(";
            printRec(f, n.left, os, true);
            os << " | ";
            printRec(f, n.right, os, true);
            os << ")";
            break;
        case NodeKind::ProbGeq:
            os << "P>=" << formatProb(n.p) << " [ ";
            printPath(f, f.node(n.path), os);
            os << " ]";
            break;
        default:
            throw std::logic_error("path node outside ProbGeq");
    }
}

}  // namespace

std::string printNode(const Formula& f, int id) {
    std::ostringstream os;
    const FormulaNode& n = f.node(id);
    if (n.kind == NodeKind::Next || n.kind == NodeKind::WeakUntil ||
        n.kind == NodeKind::ContinuingWeakUntil || n.kind == NodeKind::Until) {
        printPath(f, n, os);
    } else {
        printRec(f, id, os, false);
    }
    return os.str();
}

std::string printFormula(const Formula& f) { return printNode(f, f.root); }

// ---------------------------------------------------------------------------
// Structural equality / extraction.

bool structurallyEqual(const Formula& a, int ia, const Formula& b, int ib) {
    const FormulaNode& x = a.node(ia);
    const FormulaNode& y = b.node(ib);
    if (x.kind != y.kind || x.atom != y.atom || x.p != y.p) return false;
    if ((x.left >= 0) != (y.left >= 0) || (x.right >= 0) != (y.right >= 0)) return false;
    if (x.kind == NodeKind::ProbGeq) return structurallyEqual(a, x.path, b, y.path);
    if (x.left >= 0 && !structurallyEqual(a, x.left, b, y.left)) return false;
    if (x.right >= 0 && !structurallyEqual(a, x.right, b, y.right)) return false;
    return true;
}

bool structurallyEqual(const Formula& a, const Formula& b) {
    return structurallyEqual(a, a.root, b, b.root);
}

namespace {

int copySubtree(const Formula& src, int id, std::vector<FormulaNode>& out) {
    FormulaNode n = src.node(id);
    if (n.kind == NodeKind::ProbGeq) {
        n.path = copySubtree(src, n.path, out);
    } else {
        if (n.left >= 0) n.left = copySubtree(src, n.left, out);
        if (n.right >= 0) n.right = copySubtree(src, n.right, out);
    }
    out.push_back(n);
    return static_cast<int>(out.size() - 1);
}

}  // namespace

Formula subformula(const Formula& f, int nodeId) {
    std::vector<FormulaNode> nodes;
    int root = copySubtree(f, nodeId, nodes);
    return finalizeFormula(std::move(nodes), root, f.fragment);
}

// ---------------------------------------------------------------------------
// Literal projection.

namespace {

// Returns the id of alit(node) appended to out, or -1 for the neutral top
// element (conjunction identities are dropped instead of materialized).
int alitRec(const Formula& f, int id, std::vector<FormulaNode>& out) {
    const FormulaNode& n = f.node(id);
    switch (n.kind) {
        case NodeKind::Atom:
        case NodeKind::NegAtom:
        case NodeKind::False: {
            out.push_back(n);
            return static_cast<int>(out.size() - 1);
        }
        case NodeKind::True:
            return -1;
        case NodeKind::And: {
            int l = alitRec(f, n.left, out);
            int r = alitRec(f, n.right, out);
            if (l < 0) return r;
            if (r < 0) return l;
            FormulaNode a;
            a.kind = NodeKind::And;
            a.left = l;
            a.right = r;
            out.push_back(a);
            return static_cast<int>(out.size() - 1);
        }
        case NodeKind::ProbGeq: {
            if (n.p == 0.0) return -1;  // P>=0 [...] is vacuous
            // alit of the probability operator is alit of the condition side.
            return alitRec(f, f.node(n.path).left, out);
        }
        default:
            throw std::logic_error("literalProjection: not a CPCTL state formula");
    }
}

}  // namespace

Formula literalProjection(const Formula& f, int nodeId) {
    std::vector<FormulaNode> nodes;
    int root = alitRec(f, nodeId, nodes);
    if (root < 0) {
        FormulaNode top;
        top.kind = NodeKind::True;
        nodes.push_back(top);
        root = static_cast<int>(nodes.size() - 1);
    }
    return finalizeFormula(std::move(nodes), root, Fragment::Cpctl);
}

// ---------------------------------------------------------------------------
// Slater transform.

Formula slaterTransform(const Formula& f, const std::vector<double>& d) {
    if (d.size() != f.pfCount())
        throw std::invalid_argument("slaterTransform: one threshold per path subformula required");
    std::vector<FormulaNode> nodes = f.nodes;
    for (size_t j = 0; j < f.pathSubs.size(); ++j) {
        if (d[j] < 0.0 || d[j] > 1.0)
            throw std::invalid_argument("slaterTransform: threshold outside [0, 1]");
        nodes[static_cast<size_t>(f.pathSubs[j])].p = d[j];
    }
    return finalizeFormula(std::move(nodes), f.root, f.fragment);
}

// ---------------------------------------------------------------------------
// FD transform.

namespace {

int fdRec(const Formula& f, int id, std::vector<FormulaNode>& out) {
    const FormulaNode& n = f.node(id);
    switch (n.kind) {
        case NodeKind::True:
        case NodeKind::False:
        case NodeKind::Atom:
        case NodeKind::NegAtom: {
            out.push_back(n);
            return static_cast<int>(out.size() - 1);
        }
        case NodeKind::And: {
            FormulaNode a;
            a.kind = NodeKind::And;
            a.left = fdRec(f, n.left, out);
            a.right = fdRec(f, n.right, out);
            out.push_back(a);
            return static_cast<int>(out.size() - 1);
        }
        case NodeKind::ProbGeq: {
            const FormulaNode& path = f.node(n.path);
            if (path.kind != NodeKind::ContinuingWeakUntil)
                throw std::logic_error("fdTransform: input must be CPCTL");
            //   l W (l & r)  ->  FD(l) U [ P=1(G l)  |  (FD(l) & FD(r)) ]
            // The almost-sure-globally disjunct keeps the original condition.
            int fdl = fdRec(f, path.left, out);
            int fdl2 = fdRec(f, path.left, out);
            int fdr = fdRec(f, path.right, out);
            int origl = copySubtree(f, path.left, out);

            FormulaNode bot;
            bot.kind = NodeKind::False;
            out.push_back(bot);
            int botId = static_cast<int>(out.size() - 1);

            FormulaNode g;
            g.kind = NodeKind::ContinuingWeakUntil;
            g.left = origl;
            g.right = botId;
            out.push_back(g);
            int gId = static_cast<int>(out.size() - 1);

            FormulaNode p1;
            p1.kind = NodeKind::ProbGeq;
            p1.p = 1.0;
            p1.path = gId;
            out.push_back(p1);
            int p1Id = static_cast<int>(out.size() - 1);

            FormulaNode conj;
            conj.kind = NodeKind::And;
            conj.left = fdl2;
            conj.right = fdr;
            out.push_back(conj);
            int conjId = static_cast<int>(out.size() - 1);

            FormulaNode disj;
            disj.kind = NodeKind::Or;
            disj.left = p1Id;
            disj.right = conjId;
            out.push_back(disj);
            int disjId = static_cast<int>(out.size() - 1);

            FormulaNode until;
            until.kind = NodeKind::Until;
            until.left = fdl;
            until.right = disjId;
            out.push_back(until);
            int untilId = static_cast<int>(out.size() - 1);

            FormulaNode prob;
            prob.kind = NodeKind::ProbGeq;
            prob.p = n.p;
            prob.path = untilId;
            out.push_back(prob);
            return static_cast<int>(out.size() - 1);
        }
        default:
            throw std::logic_error("fdTransform: input must be CPCTL");
    }
}

}  // namespace

Formula fdTransform(const Formula& f) {
    if (f.fragment != Fragment::Cpctl)
        throw std::invalid_argument("fdTransform: input must be CPCTL");
    std::vector<FormulaNode> nodes;
    int root = fdRec(f, f.root, nodes);
    return finalizeFormula(std::move(nodes), root, Fragment::SafePctl);
}

// ---------------------------------------------------------------------------
// Depths.

Depths depths(const Formula& f) {
    Depths d;
    d.nesting.assign(f.nodes.size(), 0);
    d.total.assign(f.nodes.size(), 0);
    std::function<void(int)> visit = [&](int id) {
        const FormulaNode& n = f.node(id);
        size_t i = static_cast<size_t>(id);
        switch (n.kind) {
            case NodeKind::True:
            case NodeKind::False:
            case NodeKind::Atom:
            case NodeKind::NegAtom:
                break;
            case NodeKind::And:
            case NodeKind::Or: {
                visit(n.left);
                visit(n.right);
                int ln = d.nesting[static_cast<size_t>(n.left)];
                int rn = d.nesting[static_cast<size_t>(n.right)];
                int lt = d.total[static_cast<size_t>(n.left)];
                int rt = d.total[static_cast<size_t>(n.right)];
                d.nesting[i] = std::max(ln, rn);
                // Connectives count toward total depth unless both sides are flat.
                d.total[i] = (lt == 0 && rt == 0) ? 0 : 1 + std::max(lt, rt);
                break;
            }
            case NodeKind::ProbGeq: {
                visit(n.path);
                d.nesting[i] = 1 + d.nesting[static_cast<size_t>(n.path)];
                d.total[i] = 1 + d.total[static_cast<size_t>(n.path)];
                break;
            }
            default: {  // path nodes
                visit(n.left);
                int ln = d.nesting[static_cast<size_t>(n.left)];
                int lt = d.total[static_cast<size_t>(n.left)];
                int rn = 0, rt = 0;
                if (n.right >= 0) {
                    visit(n.right);
                    rn = d.nesting[static_cast<size_t>(n.right)];
                    rt = d.total[static_cast<size_t>(n.right)];
                }
                d.nesting[i] = std::max(ln, rn);
                d.total[i] = std::max(lt, rt);
                break;
            }
        }
    };
    visit(f.root);
    return d;
}

// ---------------------------------------------------------------------------
// Canonical valuation and boolean evaluation.

std::vector<uint8_t> canonicalValuation(const Formula& f,
                                        const std::set<std::string>& labels,
                                        const std::vector<double>& nu) {
    if (nu.size() != f.pfCount())
        throw std::invalid_argument("canonicalValuation: counter dimension mismatch");
    std::vector<uint8_t> mu(f.sfCount(), 0);
    for (int id : f.stateSubs) {
        const FormulaNode& n = f.node(id);
        size_t i = static_cast<size_t>(n.sfIndex);
        switch (n.kind) {
            case NodeKind::True: mu[i] = 1; break;
            case NodeKind::False: mu[i] = 0; break;
            case NodeKind::Atom: mu[i] = labels.count(n.atom) ? 1 : 0; break;
            case NodeKind::NegAtom: mu[i] = labels.count(n.atom) ? 0 : 1; break;
            case NodeKind::And:
                mu[i] = mu[static_cast<size_t>(f.node(n.left).sfIndex)] &
                        mu[static_cast<size_t>(f.node(n.right).sfIndex)];
                break;
            case NodeKind::Or:
                mu[i] = mu[static_cast<size_t>(f.node(n.left).sfIndex)] |
                        mu[static_cast<size_t>(f.node(n.right).sfIndex)];
                break;
            case NodeKind::ProbGeq:
                mu[i] = nu[static_cast<size_t>(n.pathIndex)] >= n.p - kTieTolerance ? 1 : 0;
                break;
            default:
                throw std::logic_error("path node in stateSubs");
        }
    }
    return mu;
}

bool evalBoolean(const Formula& f, int nodeId, const std::set<std::string>& labels) {
    const FormulaNode& n = f.node(nodeId);
    switch (n.kind) {
        case NodeKind::True: return true;
        case NodeKind::False: return false;
        case NodeKind::Atom: return labels.count(n.atom) != 0;
        case NodeKind::NegAtom: return labels.count(n.atom) == 0;
        case NodeKind::And: return evalBoolean(f, n.left, labels) && evalBoolean(f, n.right, labels);
        case NodeKind::Or: return evalBoolean(f, n.left, labels) || evalBoolean(f, n.right, labels);
        default:
            throw std::invalid_argument("evalBoolean: formula contains a probability operator");
    }
}

}  // namespace cpctl
