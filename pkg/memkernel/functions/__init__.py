"""One sub-package per problem kind: logic.py plus its ui_structure.json."""
