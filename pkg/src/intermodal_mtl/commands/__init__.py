"""Command-line command implementations, one module per subcommand."""
