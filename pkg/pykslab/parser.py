# This file is part of pykslab.

# pykslab is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.

# pykslab is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.

# You should have received a copy of the GNU General Public License
# along with pykslab. If not, see <http://www.gnu.org/licenses/>.


import json
import logging
import os
import tempfile

from ply import lex, yacc

from pykslab.errors import ConfigError

number = r'-?(0|[1-9][0-9]*)(\.[0-9]+)?([eE][+-]?[0-9]+)?'
double = r'-?(0|[1-9][0-9]*)((\.[0-9]+)([eE][+-]?[0-9]+)?|[eE][+-]?[0-9]+)'
integer = r'-?(0|[1-9][0-9]*)'
string = r'"([^"\\\x00-\x1f]|\\(["\\/bfnrt]|u[0-9a-fA-F]{4}))*"'
word = r'[A-Za-z_][A-Za-z0-9_]*'


class MassMultiple(object):
    '''A mass given as a multiple of a threshold, written `1.1x`.

    Args:
        factor: The multiple.
    '''

    def __init__(self, factor: float) -> None:
        self.factor = float(factor)

    def resolve(self, threshold: float) -> float:
        '''Returns the absolute mass factor * threshold.'''
        return self.factor * threshold

    def __eq__(self, other: object) -> bool:
        return isinstance(other, MassMultiple) and self.factor == other.factor

    def __hash__(self) -> int:
        return hash(('MassMultiple', self.factor))

    def __repr__(self) -> str:
        return 'MassMultiple({})'.format(self.factor)

    def __str__(self) -> str:
        return '{}x'.format(self.factor)


class ScenarioLex(object):
    '''Lexer of scenario documents: JSON plus `//` comments and `1.1x` multiples.'''

    def __init__(self):
        self.reserved = {
            'true': 'TRUE',
            'false': 'FALSE',
            'null': 'NULL',
        }

        self.tokens = [
            'STRING',
            'MULTIPLE',
            'DOUBLE',
            'INTEGER',
            'LCURLY',
            'RCURLY',
            'LBRACK',
            'RBRACK',
            'COLON',
            'COMMA',
        ]
        self.tokens += list(self.reserved.values())
        self._lexer = None

    t_ignore = ' \t\r'

    t_LCURLY = r'\{'
    t_RCURLY = r'\}'
    t_LBRACK = r'\['
    t_RBRACK = r'\]'
    t_COLON = r':'
    t_COMMA = r','

    def t_newline(self, t):
        r'\n+'
        self._lexer.lineno += len(t.value)

    def t_COMMENT(self, t):
        r'//[^\r\n]*'
        pass

    @lex.TOKEN(string)
    def t_STRING(self, t):
        t.value = json.loads(t.value)
        return t

    @lex.TOKEN(number + r'x')
    def t_MULTIPLE(self, t):
        t.value = MassMultiple(float(t.value[:-1]))
        return t

    @lex.TOKEN(double)
    def t_DOUBLE(self, t):
        t.value = float(t.value)
        return t

    @lex.TOKEN(integer)
    def t_INTEGER(self, t):
        t.value = int(t.value)
        return t

    @lex.TOKEN(word)
    def t_WORD(self, t):
        if t.value not in self.reserved:
            raise ConfigError('unexpected word {!r} at line {}'.format(t.value, t.lexer.lineno))
        t.type = self.reserved[t.value]
        t.value = {'true': True, 'false': False, 'null': None}[t.value]
        return t

    def t_error(self, t):
        raise ConfigError('illegal character {!r} at line {}'.format(t.value[0], t.lexer.lineno))

    def build(self, **kwargs):
        self._lexer = lex.lex(object=self, **kwargs)

    def input(self, data):
        if self._lexer is None:
            self.build()
        self._lexer.lineno = 1
        self._lexer.input(data)

    def token(self):
        return self._lexer.token()

    def __call__(self):
        while True:
            tok = self.token()
            if not tok:
                break
            yield tok


class ScenarioParser(object):
    '''Parser of scenario documents.

    Objects become dicts in document order, arrays become lists and
    threshold multiples become :class:`MassMultiple` values.
    '''

    def __init__(self, lexer=None):
        if lexer is None:
            lexer = ScenarioLex()
            lexer.build()
        self.lexer = lexer
        self.tokens = self.lexer.tokens
        self.parsing_logfile = None
        self.debugging = False
        self._parser = None

    def p_document(self, p):
        '''document : value'''
        p[0] = p[1]

    def p_value(self, p):
        '''value : object
                 | array
                 | STRING
                 | MULTIPLE
                 | DOUBLE
                 | INTEGER
                 | TRUE
                 | FALSE
                 | NULL'''
        p[0] = p[1]

    def p_object(self, p):
        '''object : LCURLY member_list RCURLY
                  | LCURLY RCURLY'''
        p[0] = p[2] if len(p) == 4 else {}

    def p_member_list(self, p):
        '''member_list : member_list COMMA member
                       | member'''
        if len(p) == 4:
            key, value, line = p[3]
            if key in p[1]:
                raise ConfigError('duplicate key at line {}'.format(line), key=key)
            p[1][key] = value
            p[0] = p[1]
        else:
            key, value, _ = p[1]
            p[0] = {key: value}

    def p_member(self, p):
        '''member : STRING COLON value'''
        p[0] = (p[1], p[3], p.lineno(1))

    def p_array(self, p):
        '''array : LBRACK value_list RBRACK
                 | LBRACK RBRACK'''
        p[0] = p[2] if len(p) == 4 else []

    def p_value_list(self, p):
        '''value_list : value_list COMMA value
                      | value'''
        if len(p) == 4:
            p[1].append(p[3])
            p[0] = p[1]
        else:
            p[0] = [p[1]]

    def p_error(self, p):
        if p is None:
            raise ConfigError('unexpected end of document')
        raise ConfigError('unexpected {!r} at line {}'.format(p.value, p.lineno))

    def build(self, **kwargs):
        kwargs.setdefault('debug', False)
        kwargs.setdefault('write_tables', False)
        self._parser = yacc.yacc(module=self, **kwargs)

    def parse(self, input):
        if self._parser is None:
            self.build()
        if self.debugging:
            self.parsing_logfile = os.path.join(tempfile.gettempdir(), 'scenario_parse.log')
            log = logging.getLogger(__name__)
            log.addHandler(logging.FileHandler(self.parsing_logfile))
            return self._parser.parse(input=input, lexer=self.lexer, debug=log)
        return self._parser.parse(input=input, lexer=self.lexer)


def parse_document(text: str) -> object:
    '''Parses a scenario document from text.

    Raises:
        ConfigError: On lexical or syntax errors.
    '''
    parser = ScenarioParser()
    parser.build()
    return parser.parse(text)


def load_document(path: str) -> object:
    '''Reads and parses the scenario document at `path`.'''
    try:
        with open(path, mode='r') as file:
            text = file.read()
    except OSError as e:
        raise ConfigError('cannot read {}: {}'.format(path, e.strerror))
    return parse_document(text)
