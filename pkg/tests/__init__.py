"""
Test suite package for the ``lupaxa.s2df`` project.

Marking ``tests`` as a package keeps coverage and IDE integrations able to
resolve the test modules by dotted name.
"""

# EOF
