import pytest

LASTELT_NESTED = """\
Lst(r) >< Cons(x,Nil) => r~x
Lst(r) >< Cons(x,Cons(y,ys)) => x~Eps, Lst(r)~Cons(y,ys)
"""

# The same system written by hand with an explicit auxiliary agent.
LASTELT_ORDINARY = """\
Lst(r) >< Cons(x,xs) => xs~Aux(x,r)
Aux(x,r) >< Nil => x~r
Aux(x,r) >< Cons(y,ys) => Lst(r)~Cons(y,ys), Eps~x
"""

ERASE_RULES = """\
Eps >< One
Eps >< Two
"""

ONE_ITEM_NET = "net p~Lst(r), p~Cons(x,xs), x~One, xs~Nil\n"
TWO_ITEM_NET = "net Lst(r)~Cons(One,Cons(Two,Nil))\n"


@pytest.fixture
def lastelt_nested_program():
    from inetc import parse_program

    return parse_program(LASTELT_NESTED + ERASE_RULES + ONE_ITEM_NET)


@pytest.fixture
def lastelt_two_item_program():
    from inetc import parse_program

    return parse_program(LASTELT_NESTED + ERASE_RULES + TWO_ITEM_NET)


@pytest.fixture
def lastelt_ordinary_program():
    from inetc import parse_program

    return parse_program(LASTELT_ORDINARY + ERASE_RULES + ONE_ITEM_NET)


def parse_pattern(text: str):
    """Parse 'A(..) >< B(..)' into a RulePattern, tolerating nested agents."""
    from inetc import parse_program
    from inetc.core import Net, Rule, RulePattern
    from inetc.parser import Lexer, _Parser

    p = _Parser(Lexer(text).tokens())
    left = p.parse_term()
    p.expect("PAIR", "'><'")
    right = p.parse_term()
    return RulePattern(left, right)
