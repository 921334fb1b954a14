"""TPiet-QL: lexer, parser, printer and validator."""
