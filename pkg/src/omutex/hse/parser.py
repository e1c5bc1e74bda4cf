"""Recursive-descent parser for the ASCII guarded-command syntax.

Grammar (taken by the concrete-syntax decision):

    program   := init* process ('||' process)*
    init      := NAME '=' ('0'|'1') ';'
    process   := seq
    seq       := item (';' item)* [';']
    item      := '*' '[' seq ']'                     repetition
               | '[|' branches '|]'                  non-deterministic sel
               | '[' branches ']'                    deterministic sel
               | '[' guard ']'                       wait shorthand
               | NAME '+' | NAME '-' | 'skip'
               | '(' seq ('||' seq)* ')'             parallel group
    branches  := guard '->' seq ('[]' guard '->' seq)*
    guard     := and ('|' and)* ; and := unary ('&' unary)*
    unary     := '~' unary | '(' guard ')' | NAME

NAME is dotted (C1.r_e); `#` starts a line comment.  When a known-wire
set is supplied, any dotted name outside it is rejected (servers only
touch their declared channel wires; plain names are local variables).
"""

from __future__ import annotations

from omutex.hse import ast


class HseSyntaxError(ValueError):
    def __init__(self, line, col, msg):
        self.line = line
        self.col = col
        super().__init__("line %d, col %d: %s" % (line, col, msg))


_PUNCT = ("[|", "|]", "[]", "->", "||", "*", "[", "]", "(", ")",
          ";", "&", "|", "~", "+", "-", "=")


def tokenize(text):
    toks = []
    line = 1
    col = 1
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        two = text[i:i + 2]
        if two in ("[|", "|]", "[]", "->", "||"):
            toks.append((two, line, col))
            i += 2
            col += 2
            continue
        if c in "*[]();&|~+-=":
            toks.append((c, line, col))
            i += 1
            col += 1
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_."):
                j += 1
            toks.append((text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append((text[i:j], line, col))
            col += j - i
            i = j
            continue
        raise HseSyntaxError(line, col, "unexpected character %r" % c)
    toks.append(("<eof>", line, col))
    return toks


def _is_name(tok):
    t = tok[0]
    return (t not in _PUNCT and t != "<eof>" and t != "skip"
            and (t[0].isalpha() or t[0] == "_"))


class _Parser:
    def __init__(self, text, known_wires=None):
        self.toks = tokenize(text)
        self.pos = 0
        self.known_wires = known_wires

    def peek(self):
        return self.toks[self.pos]

    def next(self):
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def expect(self, what):
        tok = self.next()
        if tok[0] != what:
            raise HseSyntaxError(tok[1], tok[2],
                                 "expected %r, found %r" % (what, tok[0]))
        return tok

    def fail(self, msg):
        tok = self.peek()
        raise HseSyntaxError(tok[1], tok[2], msg)

    def name(self):
        tok = self.next()
        if not _is_name(tok):
            raise HseSyntaxError(tok[1], tok[2],
                                 "expected a node name, found %r" % tok[0])
        nm = tok[0]
        if "." in nm and self.known_wires is not None \
                and nm not in self.known_wires:
            raise HseSyntaxError(tok[1], tok[2],
                                 "reference to undeclared channel wire %r"
                                 % nm)
        return nm

    # guards ------------------------------------------------------------

    def guard(self):
        g = self.guard_and()
        while self.peek()[0] == "|":
            self.next()
            g = ast.Or(g, self.guard_and())
        return g

    def guard_and(self):
        g = self.guard_unary()
        while self.peek()[0] == "&":
            self.next()
            g = ast.And(g, self.guard_unary())
        return g

    def guard_unary(self):
        tok = self.peek()
        if tok[0] == "~":
            self.next()
            return ast.Not(self.guard_unary())
        if tok[0] == "(":
            self.next()
            g = self.guard()
            self.expect(")")
            return g
        return ast.Ref(self.name())

    # statements ----------------------------------------------------------

    def seq(self):
        items = [self.item()]
        while self.peek()[0] == ";":
            self.next()
            # tolerate a trailing ';' before a closer
            if self.peek()[0] in ("]", "|]", ")", "[]", "||", "<eof>"):
                break
            items.append(self.item())
        if len(items) == 1:
            return items[0]
        return ast.Seq(tuple(items))

    def branches(self):
        out = []
        while True:
            g = self.guard()
            self.expect("->")
            body = self.seq()
            out.append((g, body))
            tok = self.peek()
            if tok[0] == "[]":
                self.next()
                continue
            break
        return tuple(out)

    def item(self):
        tok = self.peek()
        t = tok[0]
        if t == "*":
            self.next()
            self.expect("[")
            body = self.seq()
            self.expect("]")
            return ast.Loop(body)
        if t == "[|":
            self.next()
            if self.peek()[0] == "|]":
                self.fail("empty selection")
            branches = self.branches()
            self.expect("|]")
            return ast.NondetSel(branches)
        if t == "[":
            self.next()
            if self.peek()[0] in ("]", "|]"):
                self.fail("empty selection")
            g = self.guard()
            if self.peek()[0] == "->":
                # deterministic selection
                self.next()
                body = self.seq()
                out = [(g, body)]
                while self.peek()[0] == "[]":
                    self.next()
                    g2 = self.guard()
                    self.expect("->")
                    out.append((g2, self.seq()))
                self.expect("]")
                return ast.DetSel(tuple(out))
            self.expect("]")
            return ast.Wait(g)
        if t == "(":
            self.next()
            parts = [self.seq()]
            while self.peek()[0] == "||":
                self.next()
                parts.append(self.seq())
            self.expect(")")
            if len(parts) == 1:
                return parts[0]
            return ast.Par(tuple(parts))
        if t == "skip":
            self.next()
            return ast.Skip()
        if _is_name(tok):
            nm = self.name()
            sign = self.next()
            if sign[0] == "+":
                return ast.Assign(nm, True)
            if sign[0] == "-":
                return ast.Assign(nm, False)
            raise HseSyntaxError(sign[1], sign[2],
                                 "expected '+' or '-' after node name")
        self.fail("expected a statement, found %r" % t)

    def program(self):
        initial = []
        # init assignments: NAME '=' 0|1 ';'
        while _is_name(self.peek()) and self.toks[self.pos + 1][0] == "=":
            nm = self.name()
            self.expect("=")
            vtok = self.next()
            if vtok[0] not in ("0", "1"):
                raise HseSyntaxError(vtok[1], vtok[2],
                                     "initial value must be 0 or 1")
            self.expect(";")
            initial.append((nm, int(vtok[0])))
        procs = [self.seq()]
        while self.peek()[0] == "||":
            self.next()
            procs.append(self.seq())
        tok = self.peek()
        if tok[0] != "<eof>":
            self.fail("unexpected trailing input %r" % tok[0])
        return ast.ProcessSet(tuple(procs), tuple(initial))


def parse_hse(text: str, known_wires=None) -> ast.ProcessSet:
    """Parse a program; see the module docstring for the grammar.

    known_wires, when given, is the set of dotted channel-wire names the
    program may reference; violations raise HseSyntaxError.
    """
    return _Parser(text, known_wires).program()


def parse_guard(text: str) -> ast.Guard:
    p = _Parser(text)
    g = p.guard()
    tok = p.peek()
    if tok[0] != "<eof>":
        raise HseSyntaxError(tok[1], tok[2],
                             "unexpected trailing input %r" % tok[0])
    return g
